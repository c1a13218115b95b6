#include "pgrules/evalmetrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace pgrules {

namespace {

// permissive pairing threshold used when the caller only wants "overlapping
// at all"; keeps zero-IoU pairs out of the match set
constexpr double kAnyOverlap = 1e-12;

std::vector<std::size_t> score_ranked_indices(const std::vector<Detection>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    return order;
}

} // namespace

const std::vector<GtAnnotation>& GroundTruthSet::for_image(const std::string& image_id) const {
    static const std::vector<GtAnnotation> empty;
    auto it = images.find(image_id);
    return it == images.end() ? empty : it->second;
}

long GroundTruthSet::total_annotations() const {
    long n = 0;
    for (const auto& [_, anns] : images) n += static_cast<long>(anns.size());
    return n;
}

MatchResult match_detections(const DetectionSet& preds, const std::vector<GtAnnotation>& gts,
                             double iou_thresh) {
    MatchResult result;
    std::vector<bool> gt_taken(gts.size(), false);
    std::vector<bool> pred_matched(preds.detections.size(), false);

    for (std::size_t pi : score_ranked_indices(preds.detections)) {
        const Detection& pred = preds.detections[pi];
        double best_iou = 0.0;
        std::size_t best_gt = gts.size();
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi] || gts[gi].label != pred.label) continue;
            double v;
            try {
                v = iou(pred.box, gts[gi].box);
            } catch (const ZeroAreaBox&) {
                continue; // degenerate pair can never reach a positive threshold
            }
            if (v >= iou_thresh && v > best_iou) {
                best_iou = v;
                best_gt = gi;
            }
        }
        if (best_gt < gts.size()) {
            gt_taken[best_gt] = true;
            pred_matched[pi] = true;
            result.pairs.emplace_back(pi, best_gt);
            result.pair_ious.push_back(best_iou);
        }
    }
    for (std::size_t pi = 0; pi < preds.detections.size(); ++pi)
        if (!pred_matched[pi]) result.unmatched_preds.push_back(pi);
    for (std::size_t gi = 0; gi < gts.size(); ++gi)
        if (!gt_taken[gi]) result.unmatched_gts.push_back(gi);
    return result;
}

double average_iou_at(const std::vector<DetectionSet>& preds, const GroundTruthSet& gts,
                      double t) {
    double sum = 0.0;
    long count = 0;
    for (const auto& ds : preds) {
        const MatchResult m = match_detections(ds, gts.for_image(ds.image_id), kAnyOverlap);
        for (double v : m.pair_ious) {
            if (v >= t) {
                sum += v;
                ++count;
            }
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double mean_average_precision(const std::vector<DetectionSet>& preds,
                              const GroundTruthSet& gts) {
    // classes that actually appear in the ground truth
    std::set<int> classes;
    std::map<int, long> gt_per_class;
    for (const auto& [_, anns] : gts.images) {
        for (const auto& a : anns) {
            classes.insert(a.label);
            ++gt_per_class[a.label];
        }
    }

    // TP/FP flags come from the shared per-image greedy matching at IoU 0.5
    struct Ranked {
        double score;
        std::size_t order; // position in the global traversal, for stable ties
        bool tp;
    };
    std::map<int, std::vector<Ranked>> per_class;
    std::size_t next_order = 0;
    for (const auto& ds : preds) {
        const MatchResult m = match_detections(ds, gts.for_image(ds.image_id), 0.5);
        std::vector<bool> matched(ds.detections.size(), false);
        for (const auto& [pi, _] : m.pairs) matched[pi] = true;
        for (std::size_t pi = 0; pi < ds.detections.size(); ++pi) {
            const Detection& d = ds.detections[pi];
            per_class[d.label].push_back({d.score, next_order++, matched[pi]});
        }
    }

    double ap_sum = 0.0;
    for (int cls : classes) {
        const long total_gt = gt_per_class[cls];
        auto it = per_class.find(cls);
        if (it == per_class.end() || total_gt == 0) {
            // no predictions for a class with ground truth: AP 0
            continue;
        }
        auto& ranked = it->second;
        std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.order < b.order;
        });

        std::vector<double> precision(ranked.size()), recall(ranked.size());
        long tp = 0;
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            if (ranked[k].tp) ++tp;
            precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
            recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
        }
        // right-to-left precision envelope, then sample 101 recall points
        std::vector<double> envelope(precision);
        for (std::size_t k = envelope.size(); k-- > 1;)
            envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);

        double ap = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double r = static_cast<double>(i) / 100.0;
            auto first = std::lower_bound(recall.begin(), recall.end(), r);
            if (first != recall.end())
                ap += envelope[static_cast<std::size_t>(first - recall.begin())];
        }
        ap_sum += ap / 101.0;
    }
    return classes.empty() ? 0.0 : ap_sum / static_cast<double>(classes.size());
}

std::map<std::string, long> count_false_positives(
    const std::vector<DetectionSet>& preds, const GroundTruthSet& gts,
    const std::map<std::string, std::vector<int>>& groups, const Vocabulary& vocab) {
    // groups must partition the vocabulary
    std::map<int, std::string> group_of;
    for (const auto& [group, labels] : groups) {
        for (int label : labels) {
            vocab.name_of(label); // validates range
            if (!group_of.emplace(label, group).second)
                throw ConfigError("class '" + vocab.name_of(label) +
                                  "' assigned to more than one group");
        }
    }
    if (static_cast<int>(group_of.size()) != vocab.size())
        throw ConfigError("class groups must cover the whole vocabulary");

    std::map<std::string, long> fp;
    for (const auto& [group, _] : groups) fp[group] = 0;
    for (const auto& ds : preds) {
        const MatchResult m = match_detections(ds, gts.for_image(ds.image_id), 0.5);
        for (std::size_t pi : m.unmatched_preds)
            ++fp[group_of.at(ds.detections[pi].label)];
    }
    return fp;
}

ConfidenceChanges confidence_change_report(const std::vector<DetectionSet>& before,
                                           const std::vector<DetectionSet>& after) {
    std::map<std::int64_t, double> before_scores;
    long baseline_total = 0;
    for (const auto& ds : before) {
        for (const auto& d : ds.detections) {
            ++baseline_total;
            if (!before_scores.emplace(d.id, d.score).second)
                throw ProvenanceMismatch("duplicate provenance id " + std::to_string(d.id) +
                                         " in baseline");
        }
    }

    ConfidenceChanges changes;
    std::set<std::int64_t> seen;
    for (const auto& ds : after) {
        for (const auto& d : ds.detections) {
            auto it = before_scores.find(d.id);
            if (it == before_scores.end())
                throw ProvenanceMismatch("refined detection id " + std::to_string(d.id) +
                                         " missing from baseline");
            if (!seen.insert(d.id).second)
                throw ProvenanceMismatch("duplicate provenance id " + std::to_string(d.id) +
                                         " in refined set");
            if (d.score > it->second) ++changes.num_increased;
            if (d.score < it->second) ++changes.num_decreased;
        }
    }
    // removed detections count as decreased
    changes.num_decreased +=
        baseline_total - static_cast<long>(seen.size());

    if (baseline_total > 0) {
        changes.pct_increased = 100.0 * changes.num_increased / baseline_total;
        changes.pct_decreased = 100.0 * changes.num_decreased / baseline_total;
    }
    return changes;
}

BoxReduction box_reduction_report(long baseline_count, long refined_count) {
    if (baseline_count <= 0 || refined_count < 0 || refined_count > baseline_count)
        throw InvalidCounts("need baseline >= refined >= 0 and baseline > 0, got " +
                            std::to_string(baseline_count) + "/" +
                            std::to_string(refined_count));
    BoxReduction r;
    r.baseline = baseline_count;
    r.refined = refined_count;
    r.reduction_percent =
        100.0 * static_cast<double>(baseline_count - refined_count) / baseline_count;

    // reduction percentages published for these exact count pairs; they do
    // not all agree with (B-P)/B, so both numbers are reported
    static const std::map<std::pair<long, long>, double> published = {
        {{598, 451}, 37.88}, {{909, 726}, 34.21}, {{6192, 5548}, 10.56}};
    auto it = published.find({baseline_count, refined_count});
    if (it != published.end()) r.published_reference = it->second;
    return r;
}

} // namespace pgrules
