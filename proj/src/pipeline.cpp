#include "pgrules/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "pgrules/hwad.hpp"
#include "pgrules/redundancy.hpp"

namespace pgrules {

using nlohmann::json;

const std::vector<std::string>& known_layers() {
    static const std::vector<std::string> layers = {"redundancy_containment",
                                                    "redundancy_overlap", "cawal", "hwad",
                                                    "shape_gate"};
    return layers;
}

bool PipelineConfig::layer_enabled(const std::string& name) const {
    return std::find(layers.begin(), layers.end(), name) != layers.end();
}

void PipelineConfig::validate() const {
    std::set<std::string> seen;
    for (const auto& layer : layers) {
        if (std::find(known_layers().begin(), known_layers().end(), layer) ==
            known_layers().end())
            throw ConfigError("unknown layer '" + layer + "'");
        if (!seen.insert(layer).second) throw ConfigError("layer '" + layer + "' listed twice");
    }
    if (rf < 0.0 || rf > 1.0) throw ConfigError("rf must lie in [0,1]");
    if (cawal_threshold < 0.0 || cawal_threshold > 1.0)
        throw ConfigError("cawal threshold must lie in [0,1]");
    if (hwad_alpha < 0.0 || hwad_alpha > 1.0)
        throw ConfigError("hwad alpha must lie in [0,1]");
    if (hwad_gamma < 0.0) throw ConfigError("hwad gamma must be non-negative");
    if (shape_gate.shape_alpha <= 0.0) throw ConfigError("shape alpha must be positive");
    if (shape_gate.boost_percent < 0.0)
        throw ConfigError("shape boost percent must be non-negative");
    for (const auto& b : bindings) b.validate();
}

namespace {

std::set<int> resolve_classes(const json& names, const Vocabulary& vocab,
                              const std::string& where) {
    std::set<int> ids;
    for (const auto& n : names) {
        const int id = vocab.id_of(n.get<std::string>());
        if (id < 0)
            throw ConfigError(where + ": class '" + n.get<std::string>() +
                              "' not in vocabulary");
        ids.insert(id);
    }
    return ids;
}

std::vector<ContextBinding> default_bindings(const Vocabulary& vocab, double threshold,
                                             bool attenuate) {
    std::set<int> land, water;
    for (const auto& name : {"bicycle", "motorcycle", "car", "bus", "truck"}) {
        const int id = vocab.id_of(name);
        if (id >= 0) land.insert(id);
    }
    if (vocab.id_of("boat") >= 0) water.insert(vocab.id_of("boat"));
    std::vector<ContextBinding> bindings;
    if (!water.empty())
        bindings.push_back({{"water"}, water, land, 10.0, threshold, attenuate});
    if (!land.empty())
        bindings.push_back({{"land"}, land, water, 10.0, threshold, attenuate});
    return bindings;
}

std::map<std::string, std::vector<int>> default_groups(const Vocabulary& vocab) {
    std::map<std::string, std::vector<int>> groups;
    for (int id = 0; id < vocab.size(); ++id) {
        const bool water = vocab.name_of(id) == "boat";
        groups[water ? "Water" : "Land"].push_back(id);
    }
    return groups;
}

void require_keys(const json& doc, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, _] : doc.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

} // namespace

PipelineConfig parse_pipeline_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(doc,
                 {"vocabulary", "layers", "rf", "cawal", "hwad", "shape_gate", "class_groups",
                  "seed"},
                 "config");

    PipelineConfig cfg;
    if (doc.contains("vocabulary"))
        cfg.vocabulary = Vocabulary(doc["vocabulary"].get<std::vector<std::string>>());
    if (doc.contains("layers")) cfg.layers = doc["layers"].get<std::vector<std::string>>();
    if (doc.contains("rf")) cfg.rf = doc["rf"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();

    if (doc.contains("cawal")) {
        const json& c = doc["cawal"];
        require_keys(c, {"threshold", "attenuate", "bindings"}, "config.cawal");
        if (c.contains("threshold")) cfg.cawal_threshold = c["threshold"].get<double>();
        if (c.contains("attenuate")) cfg.cawal_attenuate = c["attenuate"].get<bool>();
        if (c.contains("bindings")) {
            for (const auto& b : c["bindings"]) {
                require_keys(b,
                             {"context_labels", "boosted_classes", "attenuated_classes",
                              "adjust_percent", "threshold"},
                             "config.cawal.bindings[]");
                ContextBinding binding;
                for (const auto& l : b.at("context_labels"))
                    binding.context_labels.insert(l.get<std::string>());
                binding.boosted_classes =
                    resolve_classes(b.at("boosted_classes"), cfg.vocabulary, "boosted_classes");
                if (b.contains("attenuated_classes"))
                    binding.attenuated_classes = resolve_classes(
                        b["attenuated_classes"], cfg.vocabulary, "attenuated_classes");
                if (b.contains("adjust_percent"))
                    binding.adjust_percent = b["adjust_percent"].get<double>();
                binding.threshold = b.contains("threshold") ? b["threshold"].get<double>()
                                                            : cfg.cawal_threshold;
                binding.attenuate = cfg.cawal_attenuate;
                cfg.bindings.push_back(std::move(binding));
            }
        }
    }
    if (cfg.bindings.empty())
        cfg.bindings = default_bindings(cfg.vocabulary, cfg.cawal_threshold, cfg.cawal_attenuate);

    if (doc.contains("hwad")) {
        require_keys(doc["hwad"], {"alpha", "gamma"}, "config.hwad");
        if (doc["hwad"].contains("alpha")) cfg.hwad_alpha = doc["hwad"]["alpha"].get<double>();
        if (doc["hwad"].contains("gamma")) cfg.hwad_gamma = doc["hwad"]["gamma"].get<double>();
    }

    if (doc.contains("shape_gate")) {
        const json& s = doc["shape_gate"];
        require_keys(s, {"shape_alpha", "boost_percent", "knowledge_file"}, "config.shape_gate");
        if (s.contains("shape_alpha"))
            cfg.shape_gate.shape_alpha = s["shape_alpha"].get<double>();
        if (s.contains("boost_percent"))
            cfg.shape_gate.boost_percent = s["boost_percent"].get<double>();
        if (s.contains("knowledge_file"))
            cfg.shape_knowledge_path = s["knowledge_file"].get<std::string>();
    }

    if (doc.contains("class_groups")) {
        for (const auto& [group, names] : doc["class_groups"].items()) {
            std::vector<int> ids;
            for (int id : resolve_classes(names, cfg.vocabulary, "class_groups." + group))
                ids.push_back(id);
            cfg.class_groups[group] = std::move(ids);
        }
    }
    if (cfg.class_groups.empty()) cfg.class_groups = default_groups(cfg.vocabulary);

    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    try {
        return parse_pipeline_config(parse_json_file(path));
    } catch (const SchemaError& e) {
        throw ConfigError(e.what()); // a broken config file is a config error
    }
}

EvalReport evaluate_sets(const std::vector<DetectionSet>& baseline,
                         const std::vector<DetectionSet>& refined, const GroundTruthSet* gts,
                         const PipelineConfig& cfg) {
    long baseline_count = 0, refined_count = 0;
    for (const auto& ds : baseline) baseline_count += static_cast<long>(ds.detections.size());
    for (const auto& ds : refined) refined_count += static_cast<long>(ds.detections.size());

    EvalReport report;
    if (baseline_count == 0 && refined_count == 0) {
        report.box_counts = BoxReduction{}; // nothing to reduce
    } else {
        report.box_counts = box_reduction_report(baseline_count, refined_count);
    }
    report.confidence_changes = confidence_change_report(baseline, refined);
    if (gts) {
        report.baseline =
            compute_model_metrics(baseline, *gts, cfg.class_groups, cfg.vocabulary);
        report.refined = compute_model_metrics(refined, *gts, cfg.class_groups, cfg.vocabulary);
    }
    return report;
}

namespace {

long count_detections(const std::vector<DetectionSet>& sets) {
    long n = 0;
    for (const auto& ds : sets) n += static_cast<long>(ds.detections.size());
    return n;
}

long count_score_changes(const std::vector<DetectionSet>& before,
                         const std::vector<DetectionSet>& after) {
    std::map<std::int64_t, double> scores;
    for (const auto& ds : before)
        for (const auto& d : ds.detections) scores[d.id] = d.score;
    long changed = 0;
    for (const auto& ds : after)
        for (const auto& d : ds.detections)
            if (scores.at(d.id) != d.score) ++changed;
    return changed;
}

} // namespace

RunResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.paths.detections.empty()) throw ConfigError("no detections file configured");
    if (cfg.paths.out_dir.empty()) throw ConfigError("no output directory configured");

    const std::vector<DetectionSet> baseline =
        load_detections(cfg.paths.detections, cfg.vocabulary);

    std::optional<GroundTruthSet> gts;
    if (!cfg.paths.ground_truth.empty())
        gts = load_ground_truth(cfg.paths.ground_truth, cfg.vocabulary);

    std::map<std::string, const SceneLabelMap*> scene_by_image;
    std::vector<SceneLabelMap> scenes;
    if (cfg.layer_enabled("cawal")) {
        if (cfg.paths.scenes.empty())
            throw ConfigError("cawal layer enabled but no scene-map file configured");
        scenes = load_scene_maps(cfg.paths.scenes);
        for (const auto& m : scenes) scene_by_image[m.image_id] = &m;
    }

    std::optional<KnowledgeGraph> kg;
    if (cfg.layer_enabled("hwad")) {
        if (cfg.paths.knowledge.empty())
            throw ConfigError("hwad layer enabled but no knowledge-graph file configured");
        kg = parse_knowledge_graph(read_text_file(cfg.paths.knowledge));
    }

    ShapeCountsByImage shape_counts;
    ShapeKnowledge shape_table;
    if (cfg.layer_enabled("shape_gate")) {
        if (cfg.paths.shape_counts.empty())
            throw ConfigError("shape_gate layer enabled but no shape-counts file configured");
        shape_counts = load_shape_counts(cfg.paths.shape_counts);
        shape_table = parse_shape_knowledge(cfg.shape_knowledge_path.empty()
                                                ? builtin_fixture("shape-counts-v1")
                                                : read_text_file(cfg.shape_knowledge_path));
    }

    std::vector<DetectionSet> current = baseline;
    std::vector<StageStat> stages;
    std::optional<KnowledgeGraph> updated_kg;
    json shape_decisions = json::array();

    for (const auto& layer : cfg.layers) {
        StageStat stat{layer, 0, 0};
        const long before_count = count_detections(current);
        const std::vector<DetectionSet> before = current;

        if (layer == "redundancy_containment") {
            for (auto& ds : current) ds = remove_indices(ds, find_contained_redundant(ds));
        } else if (layer == "redundancy_overlap") {
            for (auto& ds : current) ds = apply_redundancy_filter(ds, cfg.rf);
        } else if (layer == "cawal") {
            for (auto& ds : current) {
                auto it = scene_by_image.find(ds.image_id);
                if (it == scene_by_image.end())
                    throw SchemaError("no scene map for image '" + ds.image_id + "'");
                for (const auto& binding : cfg.bindings)
                    ds = apply_cawal(ds, *it->second, binding);
            }
        } else if (layer == "hwad") {
            // dataset-level weight update first, then per-detection adjustment
            updated_kg = run_hwad_update_cycle(*kg, current, cfg.hwad_alpha, cfg.vocabulary);
            for (auto& ds : current)
                ds = apply_hwad(ds, *updated_kg, cfg.hwad_gamma, cfg.vocabulary);
        } else if (layer == "shape_gate") {
            for (auto& ds : current) {
                auto img = shape_counts.find(ds.image_id);
                DetectionSet kept;
                kept.image_id = ds.image_id;
                for (const auto& d : ds.detections) {
                    const ShapeCounts* counts = nullptr;
                    if (img != shape_counts.end()) {
                        auto entry = img->second.find(d.source_index);
                        if (entry != img->second.end()) counts = &entry->second;
                    }
                    if (!counts) {
                        kept.detections.push_back(d); // no entry: bypasses the gate
                        continue;
                    }
                    const ShapeGateResult r =
                        apply_shape_gate(d, *counts, shape_table, cfg.shape_gate, cfg.vocabulary);
                    shape_decisions.push_back(
                        {{"id", d.id}, {"image_id", ds.image_id}, {"kept", r.keep},
                         {"confidence", r.confidence}});
                    if (r.keep) kept.detections.push_back(r.detection);
                }
                ds = std::move(kept);
            }
        }

        stat.removed = before_count - count_detections(current);
        stat.adjusted = count_score_changes(before, current);
        stages.push_back(std::move(stat));
    }

    const EvalReport report =
        evaluate_sets(baseline, current, gts ? &*gts : nullptr, cfg);

    json doc = report_to_json(report);
    doc["layers"] = cfg.layers;
    json stage_json = json::array();
    for (const auto& st : stages)
        stage_json.push_back({{"name", st.name}, {"removed", st.removed},
                              {"adjusted", st.adjusted}});
    doc["stages"] = stage_json;
    if (cfg.layer_enabled("shape_gate")) doc["shape_gate"] = {{"decisions", shape_decisions}};

    RunResult result;
    result.report_json = doc;
    result.report_text = report_to_text(doc);
    result.refined = current;
    result.updated_knowledge = updated_kg;
    result.stages = stages;

    namespace fs = std::filesystem;
    fs::create_directories(cfg.paths.out_dir);
    const fs::path out(cfg.paths.out_dir);
    save_detections(current, cfg.vocabulary, (out / "refined_detections.json").string());
    write_text_file_atomic((out / "report.json").string(), doc.dump(2) + "\n");
    write_text_file_atomic((out / "report.txt").string(), result.report_text);
    if (updated_kg)
        persist_knowledge_graph(*updated_kg, (out / "knowledge_updated.json").string());
    else if (kg)
        persist_knowledge_graph(*kg, (out / "knowledge_updated.json").string());

    return result;
}

} // namespace pgrules
