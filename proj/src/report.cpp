#include "pgrules/report.hpp"

#include <cstdio>
#include <sstream>

namespace pgrules {

using nlohmann::json;

ModelMetrics compute_model_metrics(const std::vector<DetectionSet>& preds,
                                   const GroundTruthSet& gts,
                                   const std::map<std::string, std::vector<int>>& groups,
                                   const Vocabulary& vocab) {
    ModelMetrics m;
    m.map = mean_average_precision(preds, gts);
    for (double t : {0.50, 0.75, 0.90}) {
        char key[8];
        std::snprintf(key, sizeof(key), "%.2f", t);
        m.avg_iou[key] = average_iou_at(preds, gts, t);
    }
    m.fp_per_group = count_false_positives(preds, gts, groups, vocab);
    return m;
}

namespace {

json metrics_to_json(const ModelMetrics& m) {
    return json{{"map", m.map}, {"avg_iou", m.avg_iou}, {"false_positives", m.fp_per_group}};
}

} // namespace

json report_to_json(const EvalReport& report) {
    json box = {{"baseline", report.box_counts.baseline},
                {"refined", report.box_counts.refined},
                {"reduction_percent", report.box_counts.reduction_percent}};
    if (report.box_counts.published_reference)
        box["published_reference_percent"] = *report.box_counts.published_reference;

    json doc = {
        {"box_counts", box},
        {"confidence_changes",
         {{"num_increased", report.confidence_changes.num_increased},
          {"num_decreased", report.confidence_changes.num_decreased},
          {"pct_increased", report.confidence_changes.pct_increased},
          {"pct_decreased", report.confidence_changes.pct_decreased},
          {"percent_denominator", "baseline_detections"}}},
    };
    if (report.baseline) doc["metrics"]["baseline"] = metrics_to_json(*report.baseline);
    if (report.refined) doc["metrics"]["refined"] = metrics_to_json(*report.refined);
    return doc;
}

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

std::string report_to_text(const json& report) {
    std::ostringstream out;

    if (report.contains("metrics")) {
        const auto& m = report["metrics"];
        out << "== Detection metrics ==\n";
        out << "metric            baseline    refined\n";
        auto row = [&](const std::string& name, const std::string& b, const std::string& r) {
            out << name;
            for (std::size_t i = name.size(); i < 18; ++i) out << ' ';
            out << b << "      " << r << "\n";
        };
        auto value = [&](const char* side, auto&& pick) -> std::string {
            if (!m.contains(side)) return "   -  ";
            return fixed(pick(m[side]));
        };
        row("mAP", value("baseline", [](const json& j) { return j["map"].get<double>(); }),
            value("refined", [](const json& j) { return j["map"].get<double>(); }));
        for (const std::string t : {"0.50", "0.75", "0.90"}) {
            row("Avg IoU @ " + t,
                value("baseline", [&](const json& j) { return j["avg_iou"][t].get<double>(); }),
                value("refined", [&](const json& j) { return j["avg_iou"][t].get<double>(); }));
        }
        out << "\n";
    }

    const auto& box = report["box_counts"];
    out << "== Bounding-box reduction ==\n";
    out << "baseline boxes:    " << box["baseline"].get<long>() << "\n";
    out << "refined boxes:     " << box["refined"].get<long>() << "\n";
    out << "reduction percent: " << fixed(box["reduction_percent"].get<double>(), 2) << "\n";
    if (box.contains("published_reference_percent"))
        out << "published reference for these counts: "
            << fixed(box["published_reference_percent"].get<double>(), 2) << "\n";
    out << "\n";

    if (report.contains("metrics") && report["metrics"].contains("baseline") &&
        report["metrics"].contains("refined")) {
        out << "== False positives by class group ==\n";
        out << "group        baseline    refined\n";
        const auto& base_fp = report["metrics"]["baseline"]["false_positives"];
        const auto& ref_fp = report["metrics"]["refined"]["false_positives"];
        for (auto it = base_fp.begin(); it != base_fp.end(); ++it) {
            out << it.key();
            for (std::size_t i = it.key().size(); i < 13; ++i) out << ' ';
            out << it.value().get<long>() << "           "
                << (ref_fp.contains(it.key()) ? ref_fp[it.key()].get<long>() : 0) << "\n";
        }
        out << "\n";
    }

    const auto& cc = report["confidence_changes"];
    out << "== Confidence-score changes ==\n";
    out << "increased: " << cc["num_increased"].get<long>() << " ("
        << fixed(cc["pct_increased"].get<double>(), 2) << "% of baseline detections)\n";
    out << "decreased: " << cc["num_decreased"].get<long>() << " ("
        << fixed(cc["pct_decreased"].get<double>(), 2) << "% of baseline detections)\n";

    if (report.contains("stages")) {
        out << "\n== Pipeline stages ==\n";
        for (const auto& st : report["stages"]) {
            out << st["name"].get<std::string>() << ": removed "
                << st["removed"].get<long>() << ", adjusted " << st["adjusted"].get<long>()
                << "\n";
        }
    }
    return out.str();
}

} // namespace pgrules
