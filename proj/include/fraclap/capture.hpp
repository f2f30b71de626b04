#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "fraclap/constants.hpp"
#include "fraclap/geometry.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/targets.hpp"

namespace fraclap {

/// One Green's field per target center, all on the same grid/operator.
struct GreensSet {
    std::vector<std::shared_ptr<const GreensField>> fields;
};

GreensSet solve_greens_set(const TargetSet& ts, const OperatorMatrix& op,
                           const QuadratureSpec& quad = {});

/// Green's interaction matrix: diagonal R(x_i; x_i), off-diagonal G(x_i; x_j),
/// with the kappa^(2-2 alpha) diagonal that inverts the scale matrix K.
struct InteractionMatrix {
    Eigen::MatrixXd g;          // symmetrized
    Eigen::VectorXd k_inv;      // kappa_i^(2-2 alpha)
    double symmetry_defect = 0.0;  // max |g - g^T| / max |g| before symmetrizing
};

InteractionMatrix build_interaction(const TargetSet& ts, const GreensSet& gs,
                                    const AlphaParams& params);

/// Entrywise two-grid Richardson extrapolation of the interaction matrix.
/// The grid Green's solves converge like h^rate with rate near 1/2 over the
/// working range of alpha; extrapolating a coarse/fine pair removes most of
/// the discretization bias, which matters once the leading term no longer
/// dominates the interaction entries (large alpha).
InteractionMatrix build_interaction_richardson(const TargetSet& ts,
                                               const GreensSet& coarse,
                                               const GreensSet& fine,
                                               const AlphaParams& params,
                                               double rate = 0.5);

struct GmfptResult {
    double ubar = 0.0;
    Eigen::VectorXd s;            // source strengths, sums to c_alpha
    double consistency_defect = 0.0;
    bool regime_warning = false;  // leading term no longer dominates the correction
    std::string warning;
};

/// Full-inversion GMFPT: ubar = 1 / (1^T [c chi eps^(2a-2) K - G]^(-1) 1).
GmfptResult gmfpt_full(const TargetSet& ts, const InteractionMatrix& im,
                       const AlphaParams& params);

/// Two-term expansion:
/// c chi eps^(2a-2) / (1^T K^(-1) 1) - 1^T K^(-1) G K^(-1) 1 / (1^T K^(-1) 1)^2.
double gmfpt_two_term(const TargetSet& ts, const InteractionMatrix& im,
                      const AlphaParams& params);

}  // namespace fraclap
