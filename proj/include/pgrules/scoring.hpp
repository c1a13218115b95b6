#pragma once

#include <algorithm>
#include <cmath>

#include "pgrules/detections.hpp"
#include "pgrules/errors.hpp"

namespace pgrules {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Score mapping shared by every logit-adjusting layer: with logits present
// the score is the logistic of the detection's own-class logit; without
// logits the multiplicative factor is applied to the score directly.
inline double score_from_logits(const Detection& d) {
    if (d.label < 0 || d.label >= static_cast<int>(d.logits.size()))
        throw MissingLogits("detection label " + std::to_string(d.label) +
                            " has no logit entry (vector size " +
                            std::to_string(d.logits.size()) + ")");
    return clamp01(logistic(d.logits[static_cast<std::size_t>(d.label)]));
}

// Scales every logit of the detection by `factor` (a negative logit scaled
// by a factor > 1 moves further from zero and lowers the mapped score).
inline void scale_logit_row(Detection& d, double factor) {
    if (factor == 1.0) return;
    if (d.has_logits()) {
        for (double& v : d.logits) v *= factor;
        d.score = score_from_logits(d);
    } else {
        d.score = clamp01(d.score * factor);
    }
}

// Scales only the detection's own-class logit.
inline void scale_own_logit(Detection& d, double factor) {
    if (factor == 1.0) return;
    if (d.has_logits()) {
        if (d.label < 0 || d.label >= static_cast<int>(d.logits.size()))
            throw MissingLogits("detection label " + std::to_string(d.label) +
                                " has no logit entry (vector size " +
                                std::to_string(d.logits.size()) + ")");
        d.logits[static_cast<std::size_t>(d.label)] *= factor;
        d.score = score_from_logits(d);
    } else {
        d.score = clamp01(d.score * factor);
    }
}

} // namespace pgrules
