#pragma once

#include <cstddef>
#include <set>

#include "pgrules/detections.hpp"

namespace pgrules {

// Redundancy elimination over same-class box pairs. Both passes are
// two-phase: flagged indices are computed against the original set and
// removed once, so a box is never spared because its container was also
// removed. For mutually redundant pairs the lower-scoring box is flagged
// (equal scores: the higher index), keeping one representative alive.

// Containment rule only: i is redundant when some same-class j contains it.
std::set<std::size_t> find_contained_redundant(const DetectionSet& ds);

// Full redundancy condition: containment OR overlap fraction >= rf.
std::set<std::size_t> find_overlap_redundant(const DetectionSet& ds, double rf);

// Removes the given indices; survivors keep their relative order.
DetectionSet remove_indices(const DetectionSet& ds, const std::set<std::size_t>& indices);

DetectionSet apply_redundancy_filter(const DetectionSet& ds, double rf);

} // namespace pgrules
