#pragma once

#include <Eigen/Dense>
#include <string>

#include "fraclap/capture.hpp"

namespace fraclap {

/// Splitting-probability asymptotics. The target set must carry exactly one
/// desired target, stored at index 0; the remaining N entries are obstacles.
struct SplitResult {
    double vbar = 0.0;
    Eigen::VectorXd s;          // source strengths, sums to zero
    double zero_sum_defect = 0.0;
    bool regime_warning = false;
    std::string warning;
};

/// All-orders formula
///   vbar = 1^T B^(-1) e1 / 1^T B^(-1) 1,  B = c chi eps^(2a-2) K - G,
/// with s = c_alpha B^(-1) (vbar 1 - e1). Warns if vbar exits [0,1] by less
/// than 1e-3 and fails beyond.
SplitResult split_full(const TargetSet& ts, const InteractionMatrix& im,
                       const AlphaParams& params);

/// Two-term expansion in eps; for unit kappa it reduces to
///   1/(N+1) + eps^(2-2a) / (c chi (N+1)^2) * 1^T G [(N+1) e1 - 1].
double split_two_term(const TargetSet& ts, const InteractionMatrix& im,
                      const AlphaParams& params);

/// Pointwise splitting probability v(x) ~ vbar + (1/c_alpha) sum_i s_i G(x; x_i),
/// clamped to [0, 1]. Inside a target disk the exterior value (1 for the
/// desired target, 0 for obstacles) is returned directly.
double split_field(const SplitResult& res, const TargetSet& ts, const GreensSet& gs,
                   const AlphaParams& params, Point2 x,
                   double* pre_clamp = nullptr);

}  // namespace fraclap
