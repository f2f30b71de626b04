#pragma once

#include <cmath>
#include <cstdint>

namespace fraclap {

/// Point in the plane; the domain of interest is the unit square [0,1]^2.
struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;

    bool operator==(const Point2&) const = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Point2 operator*(double c, Point2 a) { return {c * a.x1, c * a.x2}; }

inline double norm(Point2 a) { return std::hypot(a.x1, a.x2); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

inline bool in_closed_unit_square(Point2 p) {
    return p.x1 >= 0.0 && p.x1 <= 1.0 && p.x2 >= 0.0 && p.x2 <= 1.0;
}

/// Distance from an interior point to the boundary of the unit square.
inline double dist_to_boundary(Point2 p) {
    double d1 = std::min(p.x1, 1.0 - p.x1);
    double d2 = std::min(p.x2, 1.0 - p.x2);
    return std::min(d1, d2);
}

enum class BoundaryKind : std::uint8_t { Periodic = 0, Neumann = 1 };

inline const char* to_string(BoundaryKind b) {
    return b == BoundaryKind::Periodic ? "periodic" : "neumann";
}

/// Uniform cell-centered grid on the unit square: node (i,j) sits at
/// ((i+1/2)h, (j+1/2)h) with h = 1/n, so no node touches the boundary.
struct GridSpec {
    int n = 0;

    double h() const { return 1.0 / n; }
    int size() const { return n * n; }
    int index(int i, int j) const { return i * n + j; }
    Point2 node(int i, int j) const {
        double hh = h();
        return {(i + 0.5) * hh, (j + 0.5) * hh};
    }
    Point2 node(int p) const { return node(p / n, p % n); }
};

}  // namespace fraclap
