#include "pgrules/cawal.hpp"

#include "pgrules/errors.hpp"
#include "pgrules/scoring.hpp"

namespace pgrules {

void ContextBinding::validate() const {
    if (boosted_classes.empty())
        throw ConfigError("context binding must boost at least one class");
    if (threshold < 0.0 || threshold > 1.0)
        throw ConfigError("context threshold must lie in [0,1]");
    if (adjust_percent < 0.0)
        throw ConfigError("adjust percent must be non-negative");
    if (attenuate && adjust_percent >= 100.0)
        throw ConfigError("attenuation needs adjust percent < 100");
}

double context_fraction(const SceneLabelMap& map, const std::set<std::string>& context_labels) {
    // resolve names through this map's legend
    std::set<int> wanted;
    for (const auto& [id, name] : map.legend)
        if (context_labels.count(name)) wanted.insert(id);

    long total = 0;
    long hits = 0;
    for (const auto& row : map.rows) {
        total += static_cast<long>(row.size());
        for (int cell : row)
            if (wanted.count(cell)) ++hits;
    }
    if (total == 0) throw EmptySceneMap("scene map for '" + map.image_id + "' has no labels");
    return static_cast<double>(hits) / static_cast<double>(total);
}

DetectionSet apply_cawal(const DetectionSet& ds, const SceneLabelMap& map,
                         const ContextBinding& binding) {
    binding.validate();
    const double fraction = context_fraction(map, binding.context_labels);
    if (!(fraction > binding.threshold)) return ds; // strict inequality

    const double beta = binding.adjust_percent / 100.0;
    DetectionSet out = ds;
    for (auto& d : out.detections) {
        if (binding.boosted_classes.count(d.label)) {
            scale_logit_row(d, 1.0 + beta);
        } else if (binding.attenuate && binding.attenuated_classes.count(d.label)) {
            scale_logit_row(d, 1.0 - beta);
        }
    }
    return out;
}

} // namespace pgrules
