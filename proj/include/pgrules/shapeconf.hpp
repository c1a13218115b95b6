#pragma once

#include <map>
#include <string>

#include "pgrules/detections.hpp"
#include "pgrules/knowledge.hpp"

namespace pgrules {

// Detected geometric-shape counts for one detection, keyed by shape name.
using ShapeCounts = std::map<std::string, int>;

struct ShapeGateConfig {
    double shape_alpha = 1.0;    // sensitivity of the confidence curve
    double boost_percent = 10.0; // own-class logit boost on a full match
};

// Sum of squared relative errors between detected counts and expected
// ranges. Counts inside their range contribute zero; outside, the error is
// measured against the nearer bound with a max(k,1) denominator guard.
// Shapes missing from either side default to count 0 / range [0,0].
double relative_error_sum(const ShapeCounts& counts,
                          const std::map<std::string, CountRange>& expected);

// C = exp(-alpha*err) / (1 + exp(-alpha*err)); exactly 0.5 at zero error,
// decreasing toward 0 as the error grows.
double shape_confidence(const ShapeCounts& counts,
                        const std::map<std::string, CountRange>& expected,
                        double shape_alpha);

struct ShapeGateResult {
    bool keep = true;
    double confidence = 0.0; // the Eq-style numeric confidence, reported either way
    Detection detection;     // adjusted detection, meaningful only when keep
};

// Binary gate: every count inside its expected range keeps the detection
// (own-class logit boosted); any count outside removes it.
ShapeGateResult apply_shape_gate(const Detection& d, const ShapeCounts& counts,
                                 const ShapeKnowledge& sk, const ShapeGateConfig& cfg,
                                 const Vocabulary& vocab);

} // namespace pgrules
