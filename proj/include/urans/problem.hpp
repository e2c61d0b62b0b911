#pragma once

// Body force of the offset-circles test flow.

#include <algorithm>

#include "assembly.hpp"
#include "wall_distance.hpp"

namespace urans
{

/// f = (4x min(t,1)(1 - x^2 - y^2), -4y min(t,1)(1 - x^2 - y^2)).
inline Vec2 offset_circles_force(Point p, double t)
{
    const double s = 4.0 * std::min(t, 1.0) * (1.0 - p.x * p.x - p.y * p.y);
    return {s * p.x, -s * p.y};
}

inline ForceFunction zero_force()
{
    return [](Point, double) { return Vec2{}; };
}

} // namespace urans
