#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgrules/cawal.hpp"
#include "pgrules/detections.hpp"
#include "pgrules/io.hpp"
#include "pgrules/knowledge.hpp"
#include "pgrules/report.hpp"
#include "pgrules/shapeconf.hpp"

namespace pgrules {

// The stage names accepted in PipelineConfig::layers, in their default order.
// The shape gate is off by default.
const std::vector<std::string>& known_layers();

struct PipelineConfig {
    Vocabulary vocabulary = Vocabulary::mevd();
    std::vector<std::string> layers = {"redundancy_containment", "redundancy_overlap",
                                       "cawal", "hwad"};

    double rf = 0.60; // redundant factor

    double cawal_threshold = 0.30;
    bool cawal_attenuate = false;
    std::vector<ContextBinding> bindings; // empty -> default water/land bindings

    double hwad_alpha = 0.50;
    double hwad_gamma = 0.10;

    ShapeGateConfig shape_gate;
    std::string shape_knowledge_path; // empty -> bundled table

    std::map<std::string, std::vector<int>> class_groups; // empty -> default Water/Land

    std::uint64_t seed = 0;

    struct Paths {
        std::string detections;
        std::string ground_truth;
        std::string scenes;
        std::string knowledge;
        std::string shape_counts;
        std::string out_dir;
    } paths;

    bool layer_enabled(const std::string& name) const;
    void validate() const; // throws ConfigError
};

PipelineConfig parse_pipeline_config(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::string& path);

struct StageStat {
    std::string name;
    long removed = 0;
    long adjusted = 0; // detections whose score changed in this stage
};

struct RunResult {
    nlohmann::json report_json;
    std::string report_text;
    std::vector<DetectionSet> refined;
    std::optional<KnowledgeGraph> updated_knowledge;
    std::vector<StageStat> stages;
};

// Full run: load inputs, apply the configured layers collection-wide in
// order (the HWAD weight-update cycle runs once over the dataset entering
// the HWAD stage, before per-detection adjustment), evaluate, and write
// refined detections, reports and the updated knowledge graph atomically
// under paths.out_dir.
RunResult run_pipeline(const PipelineConfig& cfg);

// Comparison report for two detection files sharing provenance ids.
EvalReport evaluate_sets(const std::vector<DetectionSet>& baseline,
                         const std::vector<DetectionSet>& refined,
                         const GroundTruthSet* gts, const PipelineConfig& cfg);

} // namespace pgrules
