#pragma once

#include <vector>

namespace saddlefractal {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Planar polyline; max_step is the guaranteed upper bound on the distance
// between consecutive vertices.
struct Polyline {
    std::vector<Vec2> pts;
    double max_step = 0.0;
};

} // namespace saddlefractal
