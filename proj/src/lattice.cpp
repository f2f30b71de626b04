#include "fraclap/lattice.hpp"

#include <cmath>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

// One coordinate of the Neumann image: reflect y across the cell walls one at
// a time. The result lands in [m, m+1].
double reflect_coord(int m, double y) {
    double p = y;
    if (m > 0) {
        for (int k = 1; k <= m; ++k) p = 2.0 * k - p;
    } else {
        for (int k = 0; k >= m + 1; --k) p = 2.0 * k - p;
    }
    return p;
}

}  // namespace

Point2 image_point(const ImageMap& map, std::array<int, 2> m, Point2 y) {
    if (!in_closed_unit_square(y)) {
        throw UsageError("image_point: y must lie in the closed unit square");
    }
    if (map.boundary == BoundaryKind::Periodic) {
        return {y.x1 + m[0], y.x2 + m[1]};
    }
    return {reflect_coord(m[0], y.x1), reflect_coord(m[1], y.x2)};
}

double image_sum_kernel(const ImageMap& map, Point2 x, Point2 y, double alpha) {
    if (!in_closed_unit_square(x) || !in_closed_unit_square(y)) {
        throw UsageError("image_sum_kernel: points must lie in the closed unit square");
    }
    const double p = -(1.0 + alpha);
    double sum = 0.0;
    for (int m1 = -map.m_max; m1 <= map.m_max; ++m1) {
        for (int m2 = -map.m_max; m2 <= map.m_max; ++m2) {
            Point2 t = image_point(map, {m1, m2}, y);
            double d1 = t.x1 - x.x1;
            double d2 = t.x2 - x.x2;
            double r2 = d1 * d1 + d2 * d2;
            if (r2 < kCoincidentTol * kCoincidentTol) continue;
            sum += std::pow(r2, p);
        }
    }
    return sum;
}

}  // namespace fraclap
