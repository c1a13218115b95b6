#include "pgrules/hwad.hpp"

#include <optional>

#include "pgrules/scoring.hpp"

namespace pgrules {

namespace {

std::optional<double> mean_box_area(const DetectionSet& ds, int label) {
    double sum = 0.0;
    long count = 0;
    for (const auto& d : ds.detections) {
        if (d.label == label) {
            sum += area(d.box);
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

} // namespace

RuleOutcome evaluate_rule_on_image(const SizeRule& rule, const DetectionSet& ds,
                                   const Vocabulary& vocab) {
    const int subject = vocab.id_of(rule.subject);
    const int object = vocab.id_of(rule.object);
    if (subject < 0 || object < 0) return RuleOutcome::NotApplicable;

    const auto subject_area = mean_box_area(ds, subject);
    const auto object_area = mean_box_area(ds, object);
    if (!subject_area || !object_area) return RuleOutcome::NotApplicable;

    const bool satisfied = rule.relation == SizeRelation::IsSmallerThan
                               ? *subject_area < *object_area
                               : *subject_area > *object_area;
    return satisfied ? RuleOutcome::Satisfied : RuleOutcome::Violated;
}

RuleStats accumulate_rule_stats(const SizeRule& rule,
                                const std::vector<DetectionSet>& dataset,
                                const Vocabulary& vocab) {
    RuleStats stats;
    const int subject = vocab.id_of(rule.subject);
    for (const auto& ds : dataset) {
        const bool subject_present =
            subject >= 0 && mean_box_area(ds, subject).has_value();
        if (subject_present) ++stats.c_obj;

        switch (evaluate_rule_on_image(rule, ds, vocab)) {
        case RuleOutcome::Satisfied: ++stats.c_sat; break;
        case RuleOutcome::Violated: ++stats.c_not_sat; break;
        case RuleOutcome::NotApplicable: break; // subject alone carries no evidence
        }
    }
    return stats;
}

PosteriorUpdate posterior_update(const RuleStats& stats, double prior) {
    const long n = stats.n();
    if (n == 0) throw NoEvidence("no images carried evidence for the rule");

    PosteriorUpdate u;
    u.likelihood_sat = static_cast<double>(stats.c_sat) / static_cast<double>(n);
    u.likelihood_not = static_cast<double>(stats.c_not_sat) / static_cast<double>(n);
    u.evidence = u.likelihood_sat * prior + u.likelihood_not * (1.0 - prior);
    if (u.evidence == 0.0)
        throw DegenerateEvidence("total evidence probability is zero");
    u.posterior = u.likelihood_sat * prior / u.evidence;
    u.blended = u.posterior;
    return u;
}

double blend_weight(double initial_llm_weight, double posterior, double alpha) {
    return (1.0 - alpha) * initial_llm_weight + alpha * posterior;
}

DetectionSet apply_hwad(const DetectionSet& ds, const KnowledgeGraph& kg, double gamma,
                        const Vocabulary& vocab) {
    if (gamma == 0.0) return ds;

    // rule outcomes are per-image facts; evaluate each rule once
    std::vector<std::pair<int, double>> factors; // subject label -> multiplicative factor
    for (const auto& rule : kg.rules) {
        const int subject = vocab.id_of(rule.subject);
        switch (evaluate_rule_on_image(rule, ds, vocab)) {
        case RuleOutcome::Satisfied: factors.emplace_back(subject, 1.0 + rule.weight * gamma); break;
        case RuleOutcome::Violated: factors.emplace_back(subject, 1.0 - rule.weight * gamma); break;
        case RuleOutcome::NotApplicable: break;
        }
    }

    DetectionSet out = ds;
    for (auto& d : out.detections) {
        double factor = 1.0;
        for (const auto& [subject, f] : factors)
            if (subject == d.label) factor *= f;
        scale_own_logit(d, factor); // factor 1.0 leaves the detection untouched
    }
    return out;
}

KnowledgeGraph run_hwad_update_cycle(const KnowledgeGraph& kg,
                                     const std::vector<DetectionSet>& dataset, double alpha,
                                     const Vocabulary& vocab) {
    KnowledgeGraph updated = kg;
    for (auto& rule : updated.rules) {
        const RuleStats stats = accumulate_rule_stats(rule, dataset, vocab);
        if (stats.n() == 0) continue; // no evidence, weight stays
        PosteriorUpdate u = posterior_update(stats, rule.weight);
        u.blended = blend_weight(rule.initial_llm_weight, u.posterior, alpha);
        rule.weight = u.blended;
    }
    return updated;
}

} // namespace pgrules
