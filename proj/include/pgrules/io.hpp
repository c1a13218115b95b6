#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgrules/cawal.hpp"
#include "pgrules/detections.hpp"
#include "pgrules/evalmetrics.hpp"
#include "pgrules/shapeconf.hpp"

namespace pgrules {

// Detection file: {"detections": [{"image_id", "category", "box"|"bbox",
// "score", "logits"?, "id"?, "source_index"?}, ...]}. "box" is corner format
// [x1,y1,x2,y2]; "bbox" is [x,y,w,h] and is converted at ingestion. Missing
// ids are assigned sequentially in file order.
std::vector<DetectionSet> load_detections(const std::string& path, const Vocabulary& vocab);
nlohmann::json detections_to_json(const std::vector<DetectionSet>& sets,
                                  const Vocabulary& vocab);
void save_detections(const std::vector<DetectionSet>& sets, const Vocabulary& vocab,
                     const std::string& path);

// Ground truth: {"annotations": [{"image_id", "category", "box"|"bbox"}, ...]}
GroundTruthSet load_ground_truth(const std::string& path, const Vocabulary& vocab);
nlohmann::json ground_truth_to_json(const GroundTruthSet& gts, const Vocabulary& vocab);

// Scene maps: [{"image_id", "legend": {"0": "water", ...}, "grid": [[...]]}, ...]
std::vector<SceneLabelMap> load_scene_maps(const std::string& path);
nlohmann::json scene_maps_to_json(const std::vector<SceneLabelMap>& maps);

// Shape counts: [{"image_id", "per_detection": [{"index", "counts"}, ...]}, ...];
// "index" is the detection's source_index within its image.
using ShapeCountsByImage = std::map<std::string, std::map<int, ShapeCounts>>;
ShapeCountsByImage load_shape_counts(const std::string& path);
nlohmann::json shape_counts_to_json(const ShapeCountsByImage& counts);

// Shared helpers.
std::string read_text_file(const std::string& path);        // Error on failure
void write_text_file_atomic(const std::string& path, const std::string& content);
nlohmann::json parse_json_file(const std::string& path);     // SchemaError on bad JSON

} // namespace pgrules
