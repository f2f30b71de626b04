// Direct finite-difference oracle for the narrow-capture and splitting
// problems. Deliberately independent of the greens/capture/splitting
// asymptotic pipeline: only the assembled operator is shared.
#include "fraclap/fdsolve.hpp"

#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

DirichletMask build_mask(const GridSpec& grid, const TargetSet& ts, bool splitting) {
    if (splitting) {
        validate_split_targets(ts);
    } else {
        validate_targets(ts);
    }
    DirichletMask mask;
    mask.is_fixed.assign(grid.size(), 0);
    std::vector<int> per_target(ts.targets.size(), 0);
    for (int p = 0; p < grid.size(); ++p) {
        Point2 x = grid.node(p);
        for (std::size_t i = 0; i < ts.targets.size(); ++i) {
            const Target& t = ts.targets[i];
            if (dist(x, t.center) < ts.eps * t.kappa) {
                if (mask.is_fixed[p] == 0) {
                    mask.is_fixed[p] = 1;
                    mask.fixed_nodes.push_back(p);
                    double v = 0.0;
                    if (splitting && t.role == TargetRole::Desired) v = 1.0;
                    mask.fixed_values.push_back(v);
                }
                ++per_target[i];
            }
        }
    }
    for (std::size_t i = 0; i < per_target.size(); ++i) {
        if (per_target[i] < 5) {
            std::ostringstream msg;
            msg << "target " << i << " covers only " << per_target[i]
                << " grid nodes (need >= 5); refine the grid or enlarge eps";
            throw RegimeError(msg.str());
        }
    }
    return mask;
}

namespace {

FdSolution masked_solve(const OperatorMatrix& op, const DirichletMask& mask,
                        double free_rhs) {
    const auto N = op.entries.rows();
    Eigen::MatrixXd M = op.entries;
    Eigen::VectorXd b = Eigen::VectorXd::Constant(N, free_rhs);
    for (std::size_t k = 0; k < mask.fixed_nodes.size(); ++k) {
        const int p = mask.fixed_nodes[k];
        M.row(p).setZero();
        M(p, p) = 1.0;
        b(p) = mask.fixed_values[k];
    }
    // Row replacement breaks symmetry, so a general LU factorization is used.
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(M);
    if (!(lu.rcond() > 1e-15)) {
        throw SolverError("masked_solve: dense system is numerically singular");
    }
    FdSolution sol;
    sol.field = lu.solve(b);
    const double h = op.grid.h();
    sol.average = h * h * sol.field.sum();
    return sol;
}

}  // namespace

FdSolution solve_mfpt(const OperatorMatrix& op, const TargetSet& ts) {
    if (op.boundary != ts.boundary) {
        throw UsageError("solve_mfpt: operator and target set boundary kinds differ");
    }
    DirichletMask mask = build_mask(op.grid, ts, /*splitting=*/false);
    return masked_solve(op, mask, -1.0);
}

FdSolution solve_split(const OperatorMatrix& op, const TargetSet& ts) {
    if (op.boundary != ts.boundary) {
        throw UsageError("solve_split: operator and target set boundary kinds differ");
    }
    DirichletMask mask = build_mask(op.grid, ts, /*splitting=*/true);
    return masked_solve(op, mask, 0.0);
}

}  // namespace fraclap
