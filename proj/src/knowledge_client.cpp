#include <cstdlib>
#include <regex>

#ifdef PGRULES_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "pgrules/knowledge.hpp"

namespace pgrules {

using nlohmann::json;

namespace {

// Illustrative size-relation weights for the default six-class vocabulary;
// the edge set is acyclic under bicycle < motorcycle < car < truck < bus < boat.
const char* kSizeGraphV1 = R"({
  "classes": ["bicycle", "motorcycle", "car", "bus", "truck", "boat"],
  "rules": [
    {"subject": "bicycle", "relation": "isSmallerThan", "object": "motorcycle", "weight": 0.75, "initial_llm_weight": 0.75},
    {"subject": "motorcycle", "relation": "isBiggerThan", "object": "bicycle", "weight": 0.75, "initial_llm_weight": 0.75},
    {"subject": "bicycle", "relation": "isSmallerThan", "object": "car", "weight": 0.95, "initial_llm_weight": 0.95},
    {"subject": "motorcycle", "relation": "isSmallerThan", "object": "car", "weight": 0.90, "initial_llm_weight": 0.90},
    {"subject": "car", "relation": "isBiggerThan", "object": "motorcycle", "weight": 0.90, "initial_llm_weight": 0.90},
    {"subject": "car", "relation": "isSmallerThan", "object": "truck", "weight": 0.88, "initial_llm_weight": 0.88},
    {"subject": "truck", "relation": "isBiggerThan", "object": "car", "weight": 0.88, "initial_llm_weight": 0.88},
    {"subject": "car", "relation": "isSmallerThan", "object": "bus", "weight": 0.92, "initial_llm_weight": 0.92},
    {"subject": "bus", "relation": "isBiggerThan", "object": "car", "weight": 0.92, "initial_llm_weight": 0.92},
    {"subject": "truck", "relation": "isSmallerThan", "object": "bus", "weight": 0.60, "initial_llm_weight": 0.60},
    {"subject": "car", "relation": "isSmallerThan", "object": "boat", "weight": 0.80, "initial_llm_weight": 0.80},
    {"subject": "truck", "relation": "isSmallerThan", "object": "boat", "weight": 0.70, "initial_llm_weight": 0.70},
    {"subject": "bus", "relation": "isSmallerThan", "object": "boat", "weight": 0.65, "initial_llm_weight": 0.65},
    {"subject": "boat", "relation": "isBiggerThan", "object": "bus", "weight": 0.65, "initial_llm_weight": 0.65}
  ]
}
)";

// Bird's-eye shape-count ranges for the five land-vehicle classes.
const char* kShapeCountsV1 = R"({
  "bus":        {"rectangle": [1, 1], "square": [0, 1], "trapezoid": [2, 2], "triangle": [0, 0]},
  "truck":      {"rectangle": [1, 2], "square": [0, 1], "trapezoid": [1, 1], "triangle": [0, 0]},
  "car":        {"rectangle": [1, 1], "square": [0, 1], "trapezoid": [2, 2], "triangle": [0, 0]},
  "motorcycle": {"rectangle": [1, 1], "square": [0, 0], "trapezoid": [0, 0], "triangle": [1, 1]},
  "bicycle":    {"rectangle": [0, 1], "square": [0, 0], "trapezoid": [0, 0], "triangle": [1, 2]}
}
)";

// Some chat models wrap JSON in a markdown fence; strip it before parsing.
std::string strip_code_fence(const std::string& text) {
    static const std::regex fence(R"(^\s*```[a-zA-Z]*\s*([\s\S]*?)\s*```\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, fence)) return m[1].str();
    return text;
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

} // namespace

const std::vector<PromptSpec>& prompt_registry() {
    static const std::vector<PromptSpec> registry = {
        {"size-graph-v1", "", PromptKind::SizeGraph},
        {"shape-counts-v1", "", PromptKind::ShapeCounts},
    };
    return registry;
}

PromptSpec prompt_spec_for_key(const std::string& key) {
    for (const auto& p : prompt_registry())
        if (p.key == key) return p;
    throw ValidationError("unknown prompt key: " + key);
}

const std::string& builtin_fixture(const std::string& key) {
    static const std::map<std::string, std::string> fixtures = {
        {"size-graph-v1", kSizeGraphV1},
        {"shape-counts-v1", kShapeCountsV1},
    };
    auto it = fixtures.find(key);
    if (it == fixtures.end()) throw ValidationError("no fixture registered for key: " + key);
    return it->second;
}

std::string FixtureClient::fetch(const PromptSpec& prompt) {
    auto it = overrides_.find(prompt.key);
    if (it != overrides_.end()) return it->second;
    return builtin_fixture(prompt.key);
}

void FixtureClient::register_fixture(const std::string& key, std::string document) {
    overrides_[key] = std::move(document);
}

HttpKnowledgeClient::HttpKnowledgeClient(std::string endpoint, std::string api_key,
                                         std::string model)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), model_(std::move(model)) {}

HttpKnowledgeClient HttpKnowledgeClient::from_environment() {
    std::string endpoint = env_or_empty("PGRULES_LLM_ENDPOINT");
    std::string key = env_or_empty("PGRULES_LLM_API_KEY");
    std::string model = env_or_empty("PGRULES_LLM_MODEL");
    if (endpoint.empty())
        throw ConfigError("PGRULES_LLM_ENDPOINT is not set (required for --live)");
    if (key.empty()) throw AuthError("PGRULES_LLM_API_KEY is not set (required for --live)");
    if (model.empty()) model = "gpt-4o";
    return HttpKnowledgeClient(std::move(endpoint), std::move(key), std::move(model));
}

std::string HttpKnowledgeClient::fetch(const PromptSpec& prompt) {
    if (prompt.text.empty())
        throw ValidationError("live fetch needs the prompt text for key: " + prompt.key);

    // split "scheme://host[:port]/path" into client base and request path
    auto pos = endpoint_.find("://");
    if (pos == std::string::npos) throw ConfigError("endpoint must include a scheme: " + endpoint_);
    auto path_pos = endpoint_.find('/', pos + 3);
    const std::string base = path_pos == std::string::npos ? endpoint_ : endpoint_.substr(0, path_pos);
    const std::string path = path_pos == std::string::npos ? "/" : endpoint_.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    const json payload = {
        {"model", model_},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt.text}}})},
        {"temperature", 0.0},
    };
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

    auto res = client.Post(path, headers, payload.dump(), "application/json");
    if (!res) throw NetworkError("request to " + endpoint_ + " failed: " +
                                 httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status != 200)
        throw NetworkError("endpoint returned HTTP " + std::to_string(res->status));

    try {
        const json body = json::parse(res->body);
        const std::string content = body.at("choices").at(0).at("message").at("content");
        return strip_code_fence(content);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed chat response: ") + e.what());
    }
}

std::string fetch_knowledge(const PromptSpec& prompt, KnowledgeClient& client) {
    const std::string doc = client.fetch(prompt);
    try {
        if (prompt.kind == PromptKind::SizeGraph) {
            parse_knowledge_graph(doc);
        } else {
            parse_shape_knowledge(doc);
        }
    } catch (const SchemaError& e) {
        throw ValidationError("document for '" + prompt.key +
                              "' failed schema validation: " + e.what());
    }
    return doc;
}

} // namespace pgrules
