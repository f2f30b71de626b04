#include "fraclap/capture.hpp"

#include <cmath>
#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

GreensSet solve_greens_set(const TargetSet& ts, const OperatorMatrix& op,
                           const QuadratureSpec& quad) {
    validate_targets(ts);
    if (op.boundary != ts.boundary) {
        throw UsageError("solve_greens_set: operator and target set boundary kinds differ");
    }
    GreensSet gs;
    gs.fields.reserve(ts.targets.size());
    for (const Target& t : ts.targets) {
        gs.fields.push_back(std::make_shared<const GreensField>(
            solve_r_tilde(op, t.center, default_cutoff(t.center), quad)));
    }
    return gs;
}

InteractionMatrix build_interaction(const TargetSet& ts, const GreensSet& gs,
                                    const AlphaParams& params) {
    validate_targets(ts);
    const auto N = static_cast<Eigen::Index>(ts.targets.size());
    if (static_cast<Eigen::Index>(gs.fields.size()) != N) {
        throw UsageError("build_interaction: one Green's field per target required");
    }
    Eigen::MatrixXd g(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        const GreensField& fj = *gs.fields[j];
        g(j, j) = regular_part(fj).R;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (i == j) continue;
            g(i, j) = reconstruct_G(fj, ts.targets[i].center);
        }
    }
    InteractionMatrix im;
    double scale = g.cwiseAbs().maxCoeff();
    im.symmetry_defect =
        scale > 0.0 ? (g - g.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    // Reciprocity holds analytically; symmetrize so the numerical defect does
    // not leak asymmetry into the source strengths.
    im.g = 0.5 * (g + g.transpose());
    im.k_inv.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        im.k_inv(i) = std::pow(ts.targets[i].kappa, 2.0 - 2.0 * params.alpha);
    }
    return im;
}

InteractionMatrix build_interaction_richardson(const TargetSet& ts,
                                               const GreensSet& coarse,
                                               const GreensSet& fine,
                                               const AlphaParams& params, double rate) {
    if (coarse.fields.empty() || fine.fields.empty() ||
        coarse.fields.size() != fine.fields.size()) {
        throw UsageError("build_interaction_richardson: mismatched Green's sets");
    }
    const int n_c = coarse.fields.front()->grid.n;
    const int n_f = fine.fields.front()->grid.n;
    if (n_c >= n_f) {
        throw UsageError("build_interaction_richardson: coarse grid must be coarser");
    }
    InteractionMatrix imc = build_interaction(ts, coarse, params);
    InteractionMatrix imf = build_interaction(ts, fine, params);
    const double r = std::pow(static_cast<double>(n_c) / n_f, rate);
    InteractionMatrix im = imf;
    im.g = (imf.g - r * imc.g) / (1.0 - r);
    return im;
}

namespace {

// Bracket matrix c chi eps^(2a-2) K - G shared by the GMFPT and splitting
// solves. K = diag(kappa^(2a-2)) is the inverse of k_inv.
Eigen::MatrixXd bracket_matrix(const TargetSet& ts, const InteractionMatrix& im,
                               const AlphaParams& params) {
    const double lead =
        params.c_alpha * params.chi_alpha * std::pow(ts.eps, 2.0 * params.alpha - 2.0);
    Eigen::MatrixXd B = -im.g;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        B(i, i) += lead / im.k_inv(i);
    }
    return B;
}

}  // namespace

GmfptResult gmfpt_full(const TargetSet& ts, const InteractionMatrix& im,
                       const AlphaParams& params) {
    validate_targets(ts);
    Eigen::MatrixXd B = bracket_matrix(ts, im, params);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (!(lu.rcond() > 1e-13)) {
        throw RegimeError(
            "gmfpt_full: bracket matrix is numerically singular; eps is too large for "
            "the asymptotic regime");
    }
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(B.rows());
    Eigen::VectorXd y = lu.solve(ones);
    double denom = ones.dot(y);
    if (!(denom > 0.0)) {
        throw RegimeError("gmfpt_full: nonpositive GMFPT; outside the asymptotic regime");
    }
    GmfptResult res;
    res.ubar = 1.0 / denom;
    res.s = params.c_alpha * res.ubar * y;
    res.consistency_defect = std::abs(res.s.sum() - params.c_alpha) / params.c_alpha;

    const double lead =
        params.c_alpha * params.chi_alpha * std::pow(ts.eps, 2.0 * params.alpha - 2.0);
    double gmax = im.g.cwiseAbs().maxCoeff();
    if (lead < 5.0 * gmax) {
        res.regime_warning = true;
        std::ostringstream msg;
        msg << "leading term " << lead << " is below 5x the interaction scale " << gmax
            << "; the expansion ordering is marginal";
        res.warning = msg.str();
    }
    return res;
}

double gmfpt_two_term(const TargetSet& ts, const InteractionMatrix& im,
                      const AlphaParams& params) {
    validate_targets(ts);
    const double lead =
        params.c_alpha * params.chi_alpha * std::pow(ts.eps, 2.0 * params.alpha - 2.0);
    Eigen::VectorXd kinv_one = im.k_inv;  // K^(-1) 1
    double d = kinv_one.sum();            // 1^T K^(-1) 1
    double corr = kinv_one.dot(im.g * kinv_one);
    return lead / d - corr / (d * d);
}

}  // namespace fraclap
