#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pgrules/detections.hpp"

namespace pgrules {

// Per-image scene labels: a grid of label ids plus the legend naming them.
// Grid rows are the "list of lists" the context fraction is counted over.
struct SceneLabelMap {
    std::string image_id;
    std::map<int, std::string> legend;
    std::vector<std::vector<int>> rows;
};

// One contextual rule: when the named scene labels cover more than
// `threshold` of the map, every logit of every detection whose class is in
// `boosted_classes` is scaled by (1 + adjust_percent/100). Attenuation of
// `attenuated_classes` by (1 - adjust_percent/100) is an optional extension,
// off unless `attenuate` is set.
struct ContextBinding {
    std::set<std::string> context_labels;
    std::set<int> boosted_classes;
    std::set<int> attenuated_classes;
    double adjust_percent = 10.0;
    double threshold = 0.30;
    bool attenuate = false;

    void validate() const; // throws ConfigError on an invalid binding
};

// Fraction of grid cells carrying any of the context labels.
// Throws EmptySceneMap when the map has no cells.
double context_fraction(const SceneLabelMap& map, const std::set<std::string>& context_labels);

DetectionSet apply_cawal(const DetectionSet& ds, const SceneLabelMap& map,
                         const ContextBinding& binding);

} // namespace pgrules
