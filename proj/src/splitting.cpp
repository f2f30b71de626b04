#include "fraclap/splitting.hpp"

#include <cmath>
#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

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

SplitResult split_full(const TargetSet& ts, const InteractionMatrix& im,
                       const AlphaParams& params) {
    validate_split_targets(ts);
    Eigen::MatrixXd B = bracket_matrix(ts, im, params);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (!(lu.rcond() > 1e-13)) {
        throw RegimeError("split_full: bracket matrix is numerically singular");
    }
    const auto N1 = B.rows();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(N1);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(N1);
    e1(0) = 1.0;
    Eigen::VectorXd ye = lu.solve(ones);
    Eigen::VectorXd y1 = lu.solve(e1);

    SplitResult res;
    res.vbar = ones.dot(y1) / ones.dot(ye);
    res.s = params.c_alpha * (res.vbar * ye - y1);
    double smax = res.s.cwiseAbs().maxCoeff();
    res.zero_sum_defect = smax > 0.0 ? std::abs(res.s.sum()) / smax : 0.0;

    if (res.vbar < -1e-3 || res.vbar > 1.0 + 1e-3) {
        std::ostringstream msg;
        msg << "split_full: vbar = " << res.vbar
            << " is outside [0,1] beyond tolerance; outside the asymptotic regime";
        throw RegimeError(msg.str());
    }
    if (res.vbar < 0.0 || res.vbar > 1.0) {
        res.regime_warning = true;
        std::ostringstream msg;
        msg << "vbar = " << res.vbar << " marginally exits [0,1]";
        res.warning = msg.str();
    }
    return res;
}

double split_two_term(const TargetSet& ts, const InteractionMatrix& im,
                      const AlphaParams& params) {
    validate_split_targets(ts);
    const double lead =
        params.c_alpha * params.chi_alpha * std::pow(ts.eps, 2.0 * params.alpha - 2.0);
    const auto N1 = im.g.rows();
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(N1);
    e1(0) = 1.0;
    Eigen::VectorXd kinv_one = im.k_inv;          // K^(-1) 1
    Eigen::VectorXd kinv_e1 = im.k_inv.cwiseProduct(e1);
    double d = kinv_one.sum();                    // 1^T K^(-1) 1
    double d1 = kinv_e1.sum();                    // 1^T K^(-1) e1
    Eigen::VectorXd w = d * kinv_e1 - d1 * kinv_one;
    double corr = kinv_one.dot(im.g * w);
    return d1 / d + corr / (lead * d * d);
}

double split_field(const SplitResult& res, const TargetSet& ts, const GreensSet& gs,
                   const AlphaParams& params, Point2 x, double* pre_clamp) {
    validate_split_targets(ts);
    for (std::size_t i = 0; i < ts.targets.size(); ++i) {
        if (dist(x, ts.targets[i].center) < ts.eps * ts.targets[i].kappa) {
            double v = ts.targets[i].role == TargetRole::Desired ? 1.0 : 0.0;
            if (pre_clamp != nullptr) *pre_clamp = v;
            return v;
        }
    }
    double v = res.vbar;
    for (std::size_t i = 0; i < ts.targets.size(); ++i) {
        v += res.s(static_cast<Eigen::Index>(i)) / params.c_alpha *
             reconstruct_G(*gs.fields[i], x);
    }
    if (pre_clamp != nullptr) *pre_clamp = v;
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace fraclap
