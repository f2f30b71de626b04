#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fraclap/operator.hpp"
#include "fraclap/targets.hpp"

namespace fraclap {

/// Per-node Dirichlet data: nodes whose centers fall inside a target disk are
/// fixed to that target's boundary value.
struct DirichletMask {
    std::vector<int> fixed_nodes;
    std::vector<double> fixed_values;
    std::vector<std::uint8_t> is_fixed;  // size n^2
};

/// Rasterize the target disks. Throws RegimeError unless every disk contains
/// at least 5 grid nodes.
DirichletMask build_mask(const GridSpec& grid, const TargetSet& ts, bool splitting);

struct FdSolution {
    Eigen::VectorXd field;
    double average = 0.0;  // h^2 sum over all nodes (the unit-square mean)
};

/// Direct dense solve of the eps-dependent narrow-capture problem:
/// A u = -1 on free nodes, u = 0 inside the target disks. Returns the field
/// and the mean first passage time averaged over the square.
FdSolution solve_mfpt(const OperatorMatrix& op, const TargetSet& ts);

/// Direct dense solve of the splitting problem: A v = 0 on free nodes, v = 1
/// inside the desired disk, 0 inside obstacle disks.
FdSolution solve_split(const OperatorMatrix& op, const TargetSet& ts);

}  // namespace fraclap
