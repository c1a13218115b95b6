#include "pgrules/shapeconf.hpp"

#include <algorithm>
#include <cmath>

#include "pgrules/scoring.hpp"

namespace pgrules {

namespace {

void validate_counts(const ShapeCounts& counts) {
    const auto& shapes = shape_vocabulary();
    for (const auto& [shape, count] : counts) {
        if (std::find(shapes.begin(), shapes.end(), shape) == shapes.end())
            throw SchemaError("unknown shape name in counts: " + shape);
        if (count < 0) throw NegativeCount("negative count for shape " + shape);
    }
}

} // namespace

double relative_error_sum(const ShapeCounts& counts,
                          const std::map<std::string, CountRange>& expected) {
    validate_counts(counts);
    double sum = 0.0;
    for (const auto& shape : shape_vocabulary()) {
        auto cit = counts.find(shape);
        const int detected = cit == counts.end() ? 0 : cit->second;
        auto eit = expected.find(shape);
        const CountRange range = eit == expected.end() ? CountRange{0, 0} : eit->second;

        if (range.contains(detected)) continue;
        const int nearest = detected < range.lo ? range.lo : range.hi;
        const double denom = std::max(nearest, 1);
        const double rel = (detected - nearest) / denom;
        sum += rel * rel;
    }
    return sum;
}

double shape_confidence(const ShapeCounts& counts,
                        const std::map<std::string, CountRange>& expected,
                        double shape_alpha) {
    const double err = relative_error_sum(counts, expected);
    const double e = std::exp(-shape_alpha * err);
    return e / (1.0 + e);
}

ShapeGateResult apply_shape_gate(const Detection& d, const ShapeCounts& counts,
                                 const ShapeKnowledge& sk, const ShapeGateConfig& cfg,
                                 const Vocabulary& vocab) {
    const std::string& class_name = vocab.name_of(d.label);
    auto it = sk.classes.find(class_name);
    if (it == sk.classes.end())
        throw UnknownClass("class '" + class_name + "' has no shape knowledge");

    ShapeGateResult result;
    const double err = relative_error_sum(counts, it->second);
    result.confidence = shape_confidence(counts, it->second, cfg.shape_alpha);
    result.keep = err == 0.0;
    if (result.keep) {
        result.detection = d;
        scale_own_logit(result.detection, 1.0 + cfg.boost_percent / 100.0);
    }
    return result;
}

} // namespace pgrules
