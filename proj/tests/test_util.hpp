#pragma once

#include <random>

#include "pgrules/detections.hpp"

namespace pgrules::testutil {

// Random detection sets with integer-coordinate boxes, few classes and
// quantized scores so ties and exact duplicates actually occur.
inline DetectionSet random_set(std::mt19937_64& rng, int max_boxes, int num_classes = 3) {
    std::uniform_int_distribution<int> count(0, max_boxes);
    std::uniform_int_distribution<int> coord(0, 40);
    std::uniform_int_distribution<int> extent(1, 12);
    std::uniform_int_distribution<int> cls(0, num_classes - 1);
    std::uniform_int_distribution<int> tenth(1, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DetectionSet ds;
    ds.image_id = "random";
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Detection d;
        if (!ds.detections.empty() && unit(rng) < 0.15) {
            d.box = ds.detections[static_cast<std::size_t>(i) % ds.detections.size()].box;
        } else {
            const double x = coord(rng), y = coord(rng);
            d.box = Box(x, y, x + extent(rng), y + extent(rng));
        }
        d.label = cls(rng);
        d.score = tenth(rng) / 10.0;
        d.id = i;
        ds.detections.push_back(d);
    }
    return ds;
}

} // namespace pgrules::testutil
