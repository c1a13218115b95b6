#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pgrules/errors.hpp"

namespace pgrules {

// ---------------------------------------------------------------------------
// Size-relation knowledge graph
// ---------------------------------------------------------------------------

enum class SizeRelation { IsSmallerThan, IsBiggerThan };

const char* to_string(SizeRelation r);
SizeRelation relation_from_string(const std::string& s); // throws SchemaError

struct SizeRule {
    std::string subject;
    SizeRelation relation = SizeRelation::IsSmallerThan;
    std::string object;
    double weight = 0.0;             // updated by HWAD cycles
    double initial_llm_weight = 0.0; // never overwritten after parse
};

struct KnowledgeGraph {
    std::vector<std::string> classes;
    std::vector<SizeRule> rules;
};

// Full invariant check: weights in [0,1], endpoints known, subject != object,
// no duplicate or contradicting edges, and the induced smaller-than order is
// acyclic. Throws SchemaError / WeightOutOfRange / UnknownClass /
// ConflictingRelation.
void validate_knowledge_graph(const KnowledgeGraph& kg);

KnowledgeGraph parse_knowledge_graph(const std::string& document);
std::string serialize_knowledge_graph(const KnowledgeGraph& kg);

// Validates, then writes atomically (temp file + rename).
void persist_knowledge_graph(const KnowledgeGraph& kg, const std::string& destination);

// ---------------------------------------------------------------------------
// Expected shape-count table
// ---------------------------------------------------------------------------

struct CountRange {
    int lo = 0;
    int hi = 0;
    bool contains(int v) const { return v >= lo && v <= hi; }
};

const std::vector<std::string>& shape_vocabulary(); // the five shape names

struct ShapeKnowledge {
    // class name -> shape name -> expected count range; shapes a class does
    // not list are expected zero times.
    std::map<std::string, std::map<std::string, CountRange>> classes;

    bool has_class(const std::string& name) const { return classes.count(name) != 0; }
};

ShapeKnowledge parse_shape_knowledge(const std::string& document);

// ---------------------------------------------------------------------------
// Knowledge acquisition (offline fixtures by default, live HTTP optional)
// ---------------------------------------------------------------------------

enum class PromptKind { SizeGraph, ShapeCounts };

struct PromptSpec {
    std::string key;  // registry key, e.g. "size-graph-v1"
    std::string text; // full prompt text (required only for live clients)
    PromptKind kind = PromptKind::SizeGraph;
};

// The two bundled prompt keys and their kinds.
const std::vector<PromptSpec>& prompt_registry();
PromptSpec prompt_spec_for_key(const std::string& key); // throws ValidationError

// Compiled-in fixture documents keyed like the prompts.
const std::string& builtin_fixture(const std::string& key); // throws ValidationError

class KnowledgeClient {
public:
    virtual ~KnowledgeClient() = default;
    virtual std::string fetch(const PromptSpec& prompt) = 0;
};

// Deterministic offline client: serves compiled-in documents plus any
// fixtures registered at runtime.
class FixtureClient : public KnowledgeClient {
public:
    std::string fetch(const PromptSpec& prompt) override;
    void register_fixture(const std::string& key, std::string document);

private:
    std::map<std::string, std::string> overrides_;
};

// Chat-completions client. Endpoint and credential come from the
// environment: PGRULES_LLM_ENDPOINT, PGRULES_LLM_API_KEY, PGRULES_LLM_MODEL.
class HttpKnowledgeClient : public KnowledgeClient {
public:
    HttpKnowledgeClient(std::string endpoint, std::string api_key, std::string model);
    static HttpKnowledgeClient from_environment();

    std::string fetch(const PromptSpec& prompt) override;

private:
    std::string endpoint_;
    std::string api_key_;
    std::string model_;
};

// Fetches a document via the client and validates it against the schema the
// prompt kind implies; unvalidated output is never returned.
std::string fetch_knowledge(const PromptSpec& prompt, KnowledgeClient& client);

} // namespace pgrules
