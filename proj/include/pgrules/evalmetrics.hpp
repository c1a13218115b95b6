#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgrules/detections.hpp"

namespace pgrules {

struct GtAnnotation {
    Box box;
    int label = 0;
};

// Ground-truth annotations keyed by image id (ordered for deterministic
// aggregation).
struct GroundTruthSet {
    std::map<std::string, std::vector<GtAnnotation>> images;

    const std::vector<GtAnnotation>& for_image(const std::string& image_id) const;
    long total_annotations() const;
};

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (pred index, gt index)
    std::vector<double> pair_ious;                          // parallel to pairs
    std::vector<std::size_t> unmatched_preds;
    std::vector<std::size_t> unmatched_gts;
};

// Greedy class-aware matching: predictions in descending score order (ties:
// lower index) each take the highest-IoU unmatched same-class ground truth
// with IoU >= iou_thresh.
MatchResult match_detections(const DetectionSet& preds, const std::vector<GtAnnotation>& gts,
                             double iou_thresh);

// Mean IoU over matched pairs with IoU >= t, pooled across images; pairs are
// formed with a permissive positive-IoU match so low thresholds see every
// overlapping pair. 0 when no pair qualifies.
double average_iou_at(const std::vector<DetectionSet>& preds, const GroundTruthSet& gts,
                      double t);

// Per-class average precision at IoU 0.5 with 101-point interpolation,
// averaged over classes that have ground-truth instances.
double mean_average_precision(const std::vector<DetectionSet>& preds,
                              const GroundTruthSet& gts);

// False positives (unmatched predictions at IoU 0.5) tallied by the group of
// the predicted class. `groups` must partition the vocabulary.
std::map<std::string, long> count_false_positives(
    const std::vector<DetectionSet>& preds, const GroundTruthSet& gts,
    const std::map<std::string, std::vector<int>>& groups, const Vocabulary& vocab);

struct ConfidenceChanges {
    long num_increased = 0;
    long num_decreased = 0; // removals count as decreases
    double pct_increased = 0.0;
    double pct_decreased = 0.0; // percentages over total baseline detections
};

// Pairs detections by provenance id. Throws ProvenanceMismatch when `after`
// is not a subset of `before`.
ConfidenceChanges confidence_change_report(const std::vector<DetectionSet>& before,
                                           const std::vector<DetectionSet>& after);

struct BoxReduction {
    long baseline = 0;
    long refined = 0;
    double reduction_percent = 0.0;
    // reduction figure published elsewhere for this exact count pair, when
    // one is known; printed beside the computed value for auditability
    std::optional<double> published_reference;
};

BoxReduction box_reduction_report(long baseline_count, long refined_count);

} // namespace pgrules
