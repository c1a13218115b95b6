#pragma once

#include <vector>

#include "pgrules/detections.hpp"
#include "pgrules/knowledge.hpp"

namespace pgrules {

enum class RuleOutcome { Satisfied, Violated, NotApplicable };

// Per-rule satisfaction counters over a dataset.
struct RuleStats {
    long c_obj = 0;     // images containing the rule's subject class
    long c_sat = 0;     // images where the size comparison held
    long c_not_sat = 0; // images where it failed
    long n() const { return c_sat + c_not_sat; }
};

struct PosteriorUpdate {
    double likelihood_sat = 0.0; // P(E|T)  = c_sat / n
    double likelihood_not = 0.0; // P(E|~T) = c_not_sat / n
    double evidence = 0.0;       // P(E)
    double posterior = 0.0;      // P(T|E)
    double blended = 0.0;        // equals posterior until blend_weight is applied
};

// Compares mean box area of the subject class against the object class.
// NotApplicable when either class is absent (or not in the vocabulary).
RuleOutcome evaluate_rule_on_image(const SizeRule& rule, const DetectionSet& ds,
                                   const Vocabulary& vocab);

RuleStats accumulate_rule_stats(const SizeRule& rule,
                                const std::vector<DetectionSet>& dataset,
                                const Vocabulary& vocab);

// Bayes step over the satisfaction counters with the rule's current weight
// as the prior. Throws NoEvidence when n = 0, DegenerateEvidence when the
// total evidence probability vanishes.
PosteriorUpdate posterior_update(const RuleStats& stats, double prior);

// Convex blend of the original LLM weight with the posterior.
double blend_weight(double initial_llm_weight, double posterior, double alpha);

// Scales the own-class logit of each detection by (1 + weight*gamma) per
// satisfied rule and (1 - weight*gamma) per violated rule whose subject is
// the detection's class. gamma = 0 returns the input untouched.
DetectionSet apply_hwad(const DetectionSet& ds, const KnowledgeGraph& kg, double gamma,
                        const Vocabulary& vocab);

// One full dataset pass: every rule with evidence gets
// weight = blend_weight(initial_llm_weight, posterior, alpha); rules without
// evidence keep their weight. Returns a new graph.
KnowledgeGraph run_hwad_update_cycle(const KnowledgeGraph& kg,
                                     const std::vector<DetectionSet>& dataset, double alpha,
                                     const Vocabulary& vocab);

} // namespace pgrules
