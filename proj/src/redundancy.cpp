#include "pgrules/redundancy.hpp"

#include <functional>

#include "pgrules/geometry.hpp"

namespace pgrules {

namespace {

// True when j wins a mutual-redundancy tie against i: higher score, or
// equal score and lower index.
bool beats(const Detection& dj, std::size_t j, const Detection& di, std::size_t i) {
    if (dj.score != di.score) return dj.score > di.score;
    return j < i;
}

using PairCondition = std::function<bool(const Detection&, const Detection&)>;

std::set<std::size_t> flag_redundant(const DetectionSet& ds, const PairCondition& redundant_to) {
    const auto& dets = ds.detections;
    std::set<std::size_t> flagged;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (i == j || dets[i].label != dets[j].label) continue;
            if (!redundant_to(dets[i], dets[j])) continue;
            if (redundant_to(dets[j], dets[i])) {
                // mutual: only the loser is flagged
                if (beats(dets[j], j, dets[i], i)) {
                    flagged.insert(i);
                    break;
                }
            } else {
                flagged.insert(i);
                break;
            }
        }
    }
    return flagged;
}

} // namespace

std::set<std::size_t> find_contained_redundant(const DetectionSet& ds) {
    return flag_redundant(ds, [](const Detection& a, const Detection& b) {
        return is_contained(a.box, b.box);
    });
}

std::set<std::size_t> find_overlap_redundant(const DetectionSet& ds, double rf) {
    return flag_redundant(ds, [rf](const Detection& a, const Detection& b) {
        return is_contained(a.box, b.box) || overlap_fraction(a.box, b.box) >= rf;
    });
}

DetectionSet remove_indices(const DetectionSet& ds, const std::set<std::size_t>& indices) {
    DetectionSet out;
    out.image_id = ds.image_id;
    out.detections.reserve(ds.detections.size() - indices.size());
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        if (!indices.count(i)) out.detections.push_back(ds.detections[i]);
    }
    return out;
}

DetectionSet apply_redundancy_filter(const DetectionSet& ds, double rf) {
    return remove_indices(ds, find_overlap_redundant(ds, rf));
}

} // namespace pgrules
