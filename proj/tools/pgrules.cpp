#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgrules/io.hpp"
#include "pgrules/pipeline.hpp"
#include "pgrules/testkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_run(const std::string& config_path, const pgrules::PipelineConfig::Paths& paths) {
    pgrules::PipelineConfig cfg = config_path.empty()
                                      ? pgrules::PipelineConfig{}
                                      : pgrules::load_pipeline_config(config_path);
    cfg.paths = paths;
    const pgrules::RunResult result = pgrules::run_pipeline(cfg);
    std::cout << result.report_text;
    std::cout << "outputs written to " << paths.out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& baseline_path, const std::string& refined_path,
             const std::string& gt_path, const std::string& config_path,
             const std::string& out_dir, bool text) {
    pgrules::PipelineConfig cfg = config_path.empty()
                                      ? pgrules::PipelineConfig{}
                                      : pgrules::load_pipeline_config(config_path);
    const auto baseline = pgrules::load_detections(baseline_path, cfg.vocabulary);
    const auto refined = pgrules::load_detections(refined_path, cfg.vocabulary);
    std::optional<pgrules::GroundTruthSet> gts;
    if (!gt_path.empty()) gts = pgrules::load_ground_truth(gt_path, cfg.vocabulary);

    const pgrules::EvalReport report =
        pgrules::evaluate_sets(baseline, refined, gts ? &*gts : nullptr, cfg);
    const json doc = pgrules::report_to_json(report);
    if (text)
        std::cout << pgrules::report_to_text(doc);
    else
        std::cout << doc.dump(2) << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        pgrules::write_text_file_atomic((fs::path(out_dir) / "report.json").string(),
                                        doc.dump(2) + "\n");
        pgrules::write_text_file_atomic((fs::path(out_dir) / "report.txt").string(),
                                        pgrules::report_to_text(doc));
    }
    return 0;
}

int cmd_knowledge_fetch(const std::string& key, bool live, const std::string& prompts_dir,
                        const std::string& out_path) {
    pgrules::PromptSpec prompt = pgrules::prompt_spec_for_key(key);
    std::string document;
    if (live) {
        prompt.text = pgrules::read_text_file((fs::path(prompts_dir) / (key + ".txt")).string());
        auto client = pgrules::HttpKnowledgeClient::from_environment();
        document = pgrules::fetch_knowledge(prompt, client);
    } else {
        pgrules::FixtureClient client;
        document = pgrules::fetch_knowledge(prompt, client);
    }
    if (out_path.empty())
        std::cout << document;
    else
        pgrules::write_text_file_atomic(out_path, document);
    return 0;
}

int cmd_gen_fixtures(const pgrules::testkit::ScenarioSpec& spec, const std::string& out_dir) {
    const pgrules::testkit::Scenario s = pgrules::testkit::gen_scenario(spec);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    pgrules::save_detections(s.detections, s.vocabulary, (out / "detections.json").string());
    pgrules::write_text_file_atomic(
        (out / "ground_truth.json").string(),
        pgrules::ground_truth_to_json(s.ground_truth, s.vocabulary).dump(2) + "\n");
    pgrules::write_text_file_atomic((out / "scenes.json").string(),
                                    pgrules::scene_maps_to_json(s.scenes).dump(2) + "\n");
    pgrules::write_text_file_atomic((out / "shape_counts.json").string(),
                                    pgrules::shape_counts_to_json(s.shape_counts).dump(2) + "\n");
    pgrules::persist_knowledge_graph(s.knowledge, (out / "knowledge.json").string());
    pgrules::write_text_file_atomic((out / "manifest.json").string(),
                                    s.manifest.dump(2) + "\n");

    // a config that exercises every layer on this fixture set
    const json config = {
        {"layers", pgrules::known_layers()},
        {"rf", 0.60},
        {"cawal", {{"threshold", 0.30}}},
        {"hwad", {{"alpha", 0.50}, {"gamma", 0.10}}},
        {"shape_gate", {{"shape_alpha", 1.0}, {"boost_percent", 10.0}}},
        {"seed", spec.seed},
    };
    pgrules::write_text_file_atomic((out / "config.json").string(), config.dump(2) + "\n");
    std::cout << "fixture set written to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics-guided refinement of object-detection outputs"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "apply the rule layers and report statistics");
    pgrules::PipelineConfig::Paths paths;
    std::string config_path;
    run->add_option("--detections", paths.detections, "detections JSON file")->required();
    run->add_option("--ground-truth", paths.ground_truth, "ground-truth JSON file");
    run->add_option("--scenes", paths.scenes, "scene-map JSON file");
    run->add_option("--knowledge", paths.knowledge, "size-relation knowledge graph");
    run->add_option("--shape-counts", paths.shape_counts, "per-detection shape counts");
    run->add_option("--config", config_path, "pipeline config JSON");
    run->add_option("--out", paths.out_dir, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "compare a baseline and a refined detection file");
    std::string baseline_path, refined_path, gt_path, eval_config, eval_out;
    bool eval_text = false;
    eval->add_option("--baseline", baseline_path, "baseline detections")->required();
    eval->add_option("--refined", refined_path, "refined detections")->required();
    eval->add_option("--ground-truth", gt_path, "ground-truth JSON file");
    eval->add_option("--config", eval_config, "pipeline config JSON (vocabulary, groups)");
    eval->add_option("--out", eval_out, "directory for report.json / report.txt");
    eval->add_flag("--text", eval_text, "print the plain-text table instead of JSON");

    // knowledge fetch
    auto* knowledge = app.add_subcommand("knowledge", "knowledge-document utilities");
    auto* fetch = knowledge->add_subcommand("fetch", "fetch a knowledge document");
    std::string prompt_key, prompts_dir = "prompts", fetch_out;
    bool live = false;
    fetch->add_option("--prompt", prompt_key, "prompt key (size-graph-v1, shape-counts-v1)")
        ->required();
    fetch->add_flag("--live", live, "query the configured LLM endpoint instead of fixtures");
    fetch->add_option("--prompts-dir", prompts_dir, "directory holding <key>.txt prompt files");
    fetch->add_option("--out", fetch_out, "write the document here instead of stdout");

    // gen-fixtures
    auto* gen = app.add_subcommand("gen-fixtures", "generate a seeded synthetic fixture set");
    pgrules::testkit::ScenarioSpec spec;
    std::string gen_out;
    gen->add_option("--seed", spec.seed, "random seed")->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--images", spec.image_count, "number of images");
    gen->add_option("--min-boxes", spec.min_boxes_per_image, "min ground-truth boxes per image");
    gen->add_option("--max-boxes", spec.max_boxes_per_image, "max ground-truth boxes per image");
    gen->add_option("--nesting", spec.nesting_probability, "contained-duplicate probability");
    gen->add_option("--water-fraction", spec.water_image_fraction, "share of water-scene images");
    gen->add_option("--context-mix", spec.context_mix, "dominant scene-label cell fraction");
    gen->add_option("--mislabeled", spec.mislabeled_per_image, "planted context FPs per image");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, paths);
        if (*eval)
            return cmd_eval(baseline_path, refined_path, gt_path, eval_config, eval_out,
                            eval_text);
        if (*fetch) return cmd_knowledge_fetch(prompt_key, live, prompts_dir, fetch_out);
        if (*knowledge) {
            std::cerr << "knowledge: expected a subcommand (fetch)\n";
            return 3;
        }
        if (*gen) return cmd_gen_fixtures(spec, gen_out);
    } catch (const pgrules::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const pgrules::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const pgrules::ClientError& e) {
        std::cerr << "client error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
