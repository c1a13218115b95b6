#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "pgrules/evalmetrics.hpp"

namespace pgrules {

struct ModelMetrics {
    double map = 0.0;
    std::map<std::string, double> avg_iou;    // "0.50" / "0.75" / "0.90"
    std::map<std::string, long> fp_per_group; // group name -> false positives
};

// The evaluation statistics the engine reports: box reduction, confidence
// changes, and (when ground truth is available) the detection metrics for
// baseline and refined sets side by side.
struct EvalReport {
    BoxReduction box_counts;
    ConfidenceChanges confidence_changes;
    std::optional<ModelMetrics> baseline;
    std::optional<ModelMetrics> refined;
};

ModelMetrics compute_model_metrics(const std::vector<DetectionSet>& preds,
                                   const GroundTruthSet& gts,
                                   const std::map<std::string, std::vector<int>>& groups,
                                   const Vocabulary& vocab);

nlohmann::json report_to_json(const EvalReport& report);

// Plain-text rendering: metric comparison, box reduction, false positives by
// group, confidence changes.
std::string report_to_text(const nlohmann::json& report);

} // namespace pgrules
