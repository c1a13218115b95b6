#include "pgrules/knowledge.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include <json.hpp>

namespace pgrules {

using nlohmann::json;

const char* to_string(SizeRelation r) {
    return r == SizeRelation::IsSmallerThan ? "isSmallerThan" : "isBiggerThan";
}

SizeRelation relation_from_string(const std::string& s) {
    if (s == "isSmallerThan") return SizeRelation::IsSmallerThan;
    if (s == "isBiggerThan") return SizeRelation::IsBiggerThan;
    throw SchemaError("unknown size relation: " + s);
}

namespace {

double read_weight(const json& rule, const char* field) {
    if (!rule.contains(field) || !rule[field].is_number())
        throw SchemaError(std::string("rule is missing numeric field '") + field + "'");
    const double w = rule[field].get<double>();
    if (w < 0.0 || w > 1.0)
        throw WeightOutOfRange(std::string(field) + " = " + std::to_string(w) +
                               " outside [0,1]");
    return w;
}

// Normalized smaller-than edge regardless of which relation spelled it.
std::pair<std::string, std::string> smaller_edge(const SizeRule& r) {
    if (r.relation == SizeRelation::IsSmallerThan) return {r.subject, r.object};
    return {r.object, r.subject};
}

void check_acyclic(const KnowledgeGraph& kg) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& r : kg.rules) {
        auto [small, big] = smaller_edge(r);
        adj[small].insert(big);
    }
    // depth-first cycle detection, 0 = unvisited, 1 = on stack, 2 = done
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& node) {
        state[node] = 1;
        for (const auto& next : adj[node]) {
            if (state[next] == 1)
                throw ConflictingRelation("size-order cycle through '" + node +
                                          "' and '" + next + "'");
            if (state[next] == 0) visit(next);
        }
        state[node] = 2;
    };
    for (const auto& [node, _] : adj)
        if (state[node] == 0) visit(node);
}

} // namespace

void validate_knowledge_graph(const KnowledgeGraph& kg) {
    std::set<std::string> classes(kg.classes.begin(), kg.classes.end());
    if (classes.size() != kg.classes.size())
        throw SchemaError("duplicate entries in classes list");

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& r : kg.rules) {
        if (r.subject == r.object)
            throw SchemaError("rule relates class '" + r.subject + "' to itself");
        if (!classes.count(r.subject))
            throw UnknownClass("rule subject '" + r.subject + "' not in classes");
        if (!classes.count(r.object))
            throw UnknownClass("rule object '" + r.object + "' not in classes");
        if (r.weight < 0.0 || r.weight > 1.0)
            throw WeightOutOfRange("weight " + std::to_string(r.weight) + " outside [0,1]");
        if (r.initial_llm_weight < 0.0 || r.initial_llm_weight > 1.0)
            throw WeightOutOfRange("initial_llm_weight " +
                                   std::to_string(r.initial_llm_weight) + " outside [0,1]");
        if (!seen.insert({r.subject, to_string(r.relation), r.object}).second)
            throw ConflictingRelation("duplicate rule " + r.subject + " " +
                                      to_string(r.relation) + " " + r.object);
    }
    // antisymmetry within one graph
    for (const auto& r : kg.rules) {
        const char* opposite = r.relation == SizeRelation::IsSmallerThan
                                   ? "isBiggerThan"
                                   : "isSmallerThan";
        if (seen.count({r.subject, opposite, r.object}))
            throw ConflictingRelation("graph states both relations between '" +
                                      r.subject + "' and '" + r.object + "'");
    }
    check_acyclic(kg);
}

KnowledgeGraph parse_knowledge_graph(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("knowledge graph is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("classes") || !doc.contains("rules") ||
        !doc["classes"].is_array() || !doc["rules"].is_array())
        throw SchemaError("knowledge graph must be {\"classes\": [...], \"rules\": [...]}");

    KnowledgeGraph kg;
    for (const auto& c : doc["classes"]) {
        if (!c.is_string()) throw SchemaError("class names must be strings");
        kg.classes.push_back(c.get<std::string>());
    }
    for (const auto& r : doc["rules"]) {
        if (!r.is_object() || !r.contains("subject") || !r.contains("relation") ||
            !r.contains("object"))
            throw SchemaError("each rule needs subject/relation/object");
        SizeRule rule;
        rule.subject = r["subject"].get<std::string>();
        rule.relation = relation_from_string(r["relation"].get<std::string>());
        rule.object = r["object"].get<std::string>();
        rule.weight = read_weight(r, "weight");
        rule.initial_llm_weight = read_weight(r, "initial_llm_weight");
        kg.rules.push_back(std::move(rule));
    }
    validate_knowledge_graph(kg);
    return kg;
}

std::string serialize_knowledge_graph(const KnowledgeGraph& kg) {
    json rules = json::array();
    for (const auto& r : kg.rules) {
        rules.push_back({{"subject", r.subject},
                         {"relation", to_string(r.relation)},
                         {"object", r.object},
                         {"weight", r.weight},
                         {"initial_llm_weight", r.initial_llm_weight}});
    }
    json doc = {{"classes", kg.classes}, {"rules", rules}};
    return doc.dump(2) + "\n";
}

void persist_knowledge_graph(const KnowledgeGraph& kg, const std::string& destination) {
    validate_knowledge_graph(kg); // reject invalidated graphs before touching the file
    const std::string payload = serialize_knowledge_graph(kg);
    const std::string tmp = destination + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out << payload;
        if (!out.flush()) throw Error("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, destination, ec);
    if (ec) throw Error("cannot move '" + tmp + "' to '" + destination + "': " + ec.message());
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& shape_vocabulary() {
    static const std::vector<std::string> names = {"square", "triangle", "rectangle",
                                                   "parallelogram", "trapezoid"};
    return names;
}

namespace {

CountRange parse_range(const json& v, const std::string& where) {
    CountRange r;
    if (v.is_number_integer()) {
        r.lo = r.hi = v.get<int>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number_integer() &&
               v[1].is_number_integer()) {
        r.lo = v[0].get<int>();
        r.hi = v[1].get<int>();
    } else {
        throw SchemaError(where + ": expected integer or [lo, hi] pair");
    }
    if (r.lo < 0 || r.hi < 0) throw NegativeCount(where + ": negative shape count");
    if (r.lo > r.hi) throw SchemaError(where + ": lo > hi");
    return r;
}

} // namespace

ShapeKnowledge parse_shape_knowledge(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("shape knowledge is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.empty())
        throw SchemaError("shape knowledge must map class names to shape-count ranges");

    const auto& shapes = shape_vocabulary();
    ShapeKnowledge sk;
    for (const auto& [class_name, row] : doc.items()) {
        if (!row.is_object())
            throw SchemaError("shape row for '" + class_name + "' must be an object");
        std::map<std::string, CountRange> ranges;
        for (const auto& [shape, v] : row.items()) {
            if (std::find(shapes.begin(), shapes.end(), shape) == shapes.end())
                throw SchemaError("unknown shape '" + shape + "' for class '" +
                                  class_name + "'");
            ranges[shape] = parse_range(v, class_name + "." + shape);
        }
        sk.classes[class_name] = std::move(ranges);
    }
    return sk;
}

} // namespace pgrules
