#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgrules/cawal.hpp"
#include "pgrules/detections.hpp"
#include "pgrules/evalmetrics.hpp"
#include "pgrules/knowledge.hpp"
#include "pgrules/shapeconf.hpp"

namespace pgrules::testkit {

// ---------------------------------------------------------------------------
// Brute-force oracles. Deliberately naive restatements with their own
// arithmetic so they fail independently of the production code.
// ---------------------------------------------------------------------------

// Two-phase redundancy evaluation straight off the rule definitions:
// full condition matrix first, then the mutual-pair tie-break, then one
// removal pass. Returns the SURVIVING indices.
std::set<std::size_t> oracle_redundancy(const DetectionSet& ds, double rf);

// Pixel-count overlap fraction; exact for integer-coordinate boxes at unit
// resolution. `resolution` = samples per unit length.
double oracle_overlap_raster(const Box& a, const Box& b, int resolution = 1);

// Unit cells covered by both boxes (integer-coordinate boxes).
long raster_intersection_cells(const Box& a, const Box& b);

// Average precision by explicit enumeration of the full precision-recall
// staircase, sampling the 101 recall points by rescanning the whole curve.
double oracle_ap(const std::vector<DetectionSet>& preds, const GroundTruthSet& gts);

// ---------------------------------------------------------------------------
// Seeded synthetic scenarios with exactly known planted redundancies and
// mislabeled context false positives.
// ---------------------------------------------------------------------------

struct ScenarioSpec {
    std::uint64_t seed = 1;
    int image_count = 24;
    int min_boxes_per_image = 2; // ground-truth boxes
    int max_boxes_per_image = 6;
    double nesting_probability = 0.35; // chance a detection gets a contained duplicate
    double water_image_fraction = 0.5;
    double context_mix = 0.7; // dominant scene-label cell fraction, planted exactly
    int scene_grid_rows = 10;
    int scene_grid_cols = 10;
    int mislabeled_per_image = 1; // planted context false positives
};

struct Scenario {
    Vocabulary vocabulary;
    KnowledgeGraph knowledge;
    std::vector<DetectionSet> detections;
    GroundTruthSet ground_truth;
    std::vector<SceneLabelMap> scenes;
    // image id -> detection source index -> counts
    std::map<std::string, std::map<int, ShapeCounts>> shape_counts;
    nlohmann::json manifest; // planted quantities and the exact expected outcomes
};

Scenario gen_scenario(const ScenarioSpec& spec);

} // namespace pgrules::testkit
