#pragma once

#include <array>

#include "fraclap/geometry.hpp"

namespace fraclap {

/// Image lattice of the unit square: translations for periodic boundaries,
/// iterated specular reflections for Neumann (reflective) boundaries.
/// m_max truncates image sums at |m|_inf <= m_max.
struct ImageMap {
    BoundaryKind boundary = BoundaryKind::Periodic;
    int m_max = 6;
};

/// Image of y in the unit cell whose lower-left vertex is m.
///
/// Periodic: y + m. Neumann: |m_k| successive specular reflections per
/// coordinate (across the lines 1, 2, ..., m_k for m_k > 0 and
/// 0, -1, ..., m_k + 1 for m_k < 0).
Point2 image_point(const ImageMap& map, std::array<int, 2> m, Point2 y);

/// Truncated image-sum kernel
///   sum_{|m|_inf <= m_max} |T_m(y) - x|^(-2-2 alpha),
/// skipping any term whose image point coincides with x (those terms carry a
/// zero bracket in the nonlocal operator).
double image_sum_kernel(const ImageMap& map, Point2 x, Point2 y, double alpha);

/// Distance below which an image point counts as coincident with x.
inline constexpr double kCoincidentTol = 1e-14;

}  // namespace fraclap
