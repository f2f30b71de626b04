#pragma once

#include <vector>

#include "fraclap/geometry.hpp"

namespace fraclap {

enum class TargetRole { Desired, Obstacle };

struct Target {
    Point2 center;
    double kappa = 1.0;
    TargetRole role = TargetRole::Obstacle;

    bool operator==(const Target&) const = default;
};

/// Well-separated circular targets of radius kappa_i * eps.
///
/// separation_factor is the well-separation policy knob: pairwise center
/// distances (and, under Neumann boundaries, distances to the walls) must be
/// at least separation_factor * eps * max kappa. The default of 10 is
/// conservative; figure configurations that place targets a few radii apart
/// override it and the effective value is recorded in output metadata.
struct TargetSet {
    double eps = 0.0;
    std::vector<Target> targets;
    BoundaryKind boundary = BoundaryKind::Periodic;
    double separation_factor = 10.0;
};

/// Throws RegimeError on separation violations, UsageError on malformed sets
/// (kappa outside [0.1, 10], eps <= 0, empty target list).
void validate_targets(const TargetSet& ts);

/// Additionally requires exactly one desired target, stored at index 0.
void validate_split_targets(const TargetSet& ts);

}  // namespace fraclap
