#pragma once

#include <algorithm>

#include "pgrules/errors.hpp"

namespace pgrules {

// Axis-aligned box, corner format [x1,y1,x2,y2]. Construction normalizes
// swapped corners so x1 <= x2 and y1 <= y2 always hold.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    Box() = default;
    Box(double ax1, double ay1, double ax2, double ay2)
        : x1(std::min(ax1, ax2)),
          y1(std::min(ay1, ay2)),
          x2(std::max(ax1, ax2)),
          y2(std::max(ay1, ay2)) {}

    static Box from_xywh(double x, double y, double w, double h) {
        return Box(x, y, x + w, y + h);
    }

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }

    bool operator==(const Box& o) const = default;
};

inline double area(const Box& b) { return b.width() * b.height(); }

inline double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

// All four corner inequalities, non-strict: identical boxes contain each
// other. Tie-breaking between mutually contained boxes is the redundancy
// filter's job.
inline bool is_contained(const Box& inner, const Box& outer) {
    return inner.x1 >= outer.x1 && inner.y1 >= outer.y1 &&
           inner.x2 <= outer.x2 && inner.y2 <= outer.y2;
}

// Asymmetric overlap ratio: intersection over the area of the FIRST box.
inline double overlap_fraction(const Box& bi, const Box& bj) {
    const double a = area(bi);
    if (a <= 0.0) throw ZeroAreaBox("overlap_fraction: first box has zero area");
    return intersection_area(bi, bj) / a;
}

inline double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = area(a) + area(b) - inter;
    if (uni <= 0.0) throw ZeroAreaBox("iou: both boxes have zero area");
    return inter / uni;
}

} // namespace pgrules
