#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fraclap/errors.hpp"
#include "fraclap/splitting.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

TargetSet shield_targets(double eps, double ring = 7.0) {
    TargetSet ts;
    ts.eps = eps;
    ts.boundary = BoundaryKind::Neumann;
    ts.separation_factor = 5.0;
    ts.targets.push_back({{0.5, 0.5}, 1.0, TargetRole::Desired});
    for (int k = 0; k < 5; ++k) {
        double th = std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / 5;
        ts.targets.push_back({{0.5 + ring * eps * std::cos(th),
                               0.5 + ring * eps * std::sin(th)},
                              1.0,
                              TargetRole::Obstacle});
    }
    return ts;
}

InteractionMatrix synthetic(const Eigen::MatrixXd& g, int n) {
    InteractionMatrix im;
    im.g = g;
    im.k_inv = Eigen::VectorXd::Ones(n);
    return im;
}

// Exact 5-fold symmetric shield interaction matrix from the heat-kernel
// oracle entries at alpha = 0.6 (ring radius 7 eps, eps = 0.03).
Eigen::MatrixXd oracle_shield_g() {
    const double Rc = 0.5981158671, Ro = 0.5187728441;
    const double g01 = -0.1372207824, gadj = -0.07648997431, gskip = 0.1689464904;
    Eigen::MatrixXd g(6, 6);
    g(0, 0) = Rc;
    for (int i = 1; i < 6; ++i) {
        g(i, i) = Ro;
        g(0, i) = g(i, 0) = g01;
        for (int j = i + 1; j < 6; ++j) {
            int k = std::min(std::abs(i - j), 5 - std::abs(i - j));
            g(i, j) = g(j, i) = (k == 1) ? gadj : gskip;
        }
    }
    return g;
}

}  // namespace

TEST_CASE("role validation") {
    TargetSet ts = shield_targets(0.03);
    CHECK_NOTHROW(validate_split_targets(ts));

    TargetSet none = ts;
    none.targets[0].role = TargetRole::Obstacle;
    CHECK_THROWS_AS(validate_split_targets(none), UsageError);

    TargetSet two = ts;
    two.targets[1].role = TargetRole::Desired;
    CHECK_THROWS_AS(validate_split_targets(two), UsageError);

    TargetSet misplaced = ts;
    std::swap(misplaced.targets[0], misplaced.targets[1]);
    CHECK_THROWS_AS(validate_split_targets(misplaced), UsageError);
}

TEST_CASE("no obstacles means certain capture") {
    AlphaParams params = make_alpha_params(0.6);
    TargetSet ts;
    ts.eps = 0.03;
    ts.boundary = BoundaryKind::Neumann;
    ts.targets.push_back({{0.5, 0.5}, 1.0, TargetRole::Desired});
    Eigen::MatrixXd g(1, 1);
    g << 0.598;
    SplitResult res = split_full(ts, synthetic(g, 1), params);
    CHECK(res.vbar == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(res.s(0)) < 1e-12);
}

TEST_CASE("five identical obstacles with no interaction give 1/6") {
    AlphaParams params = make_alpha_params(0.4);
    TargetSet ts = shield_targets(0.03);
    InteractionMatrix im = synthetic(Eigen::MatrixXd::Zero(6, 6), 6);
    SplitResult res = split_full(ts, im, params);
    CHECK(res.vbar == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(split_two_term(ts, im, params) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(res.zero_sum_defect < 1e-10);
}

TEST_CASE("shield with the oracle interaction matrix") {
    AlphaParams params = make_alpha_params(0.6);
    TargetSet ts = shield_targets(0.03);
    InteractionMatrix im;
    im.g = oracle_shield_g();
    im.k_inv = Eigen::VectorXd::Ones(6);
    SplitResult res = split_full(ts, im, params);
    // Exact-matrix reference computed once from the oracle entries.
    CHECK(res.vbar == doctest::Approx(0.141854).epsilon(2e-4));
    CHECK(res.zero_sum_defect < 1e-10);
    // Five-fold symmetry carries through the linear solve.
    for (int i = 2; i <= 5; ++i) {
        CHECK(res.s(i) == doctest::Approx(res.s(1)).epsilon(1e-6));
    }
    // Moving one obstacle closer to the desired target strengthens shielding.
    Eigen::MatrixXd g_closer = im.g;
    g_closer(0, 1) = g_closer(1, 0) = 0.1;  // larger Green's coupling
    InteractionMatrix im2 = synthetic(g_closer, 6);
    SplitResult res2 = split_full(ts, im2, params);
    CHECK(res2.vbar < res.vbar);
}

TEST_CASE("two-term correction scales like eps^(2-2alpha)") {
    AlphaParams params = make_alpha_params(0.6);
    InteractionMatrix im;
    im.g = oracle_shield_g();
    im.k_inv = Eigen::VectorXd::Ones(6);
    double eps_list[] = {0.05, 0.03, 0.02};
    double x[3], y[3];
    for (int i = 0; i < 3; ++i) {
        TargetSet ts = shield_targets(eps_list[i]);
        double corr = split_two_term(ts, im, params) - 1.0 / 6.0;
        x[i] = std::log(eps_list[i]);
        y[i] = std::log(std::abs(corr));
    }
    double slope = (y[0] - y[2]) / (x[0] - x[2]);
    CHECK(std::abs(slope - (2.0 - 2.0 * params.alpha)) < 0.1 * (2.0 - 2.0 * params.alpha));

    // Full and two-term agree increasingly well as eps shrinks.
    double prev = 1e9;
    for (double eps : {0.05, 0.03, 0.02}) {
        TargetSet ts = shield_targets(eps);
        double diff = std::abs(split_full(ts, im, params).vbar -
                               split_two_term(ts, im, params));
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("pointwise field from real Green's solves") {
    // Shield at a coarse grid: boundary values inside targets, clamping, and
    // the faster power-law decay at small alpha.
    auto field_drop = [](double alpha) {
        TargetSet ts = shield_targets(0.03);
        AlphaParams params = make_alpha_params(alpha);
        auto op = assemble_cached({24}, BoundaryKind::Neumann, alpha, 6);
        GreensSet gs = solve_greens_set(ts, *op);
        InteractionMatrix im = build_interaction(ts, gs, params);
        SplitResult res = split_full(ts, im, params);

        CHECK(split_field(res, ts, gs, params, ts.targets[0].center) == 1.0);
        CHECK(split_field(res, ts, gs, params, ts.targets[1].center) == 0.0);
        double pre = 0.0;
        for (double t = 0.0; t < 1.0; t += 0.09) {
            double v = split_field(res, ts, gs, params, {0.02 + 0.95 * t, 0.03 + 0.9 * t},
                                   &pre);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        // Radial drop of the field away from the desired target.
        double v1 = split_field(res, ts, gs, params, {0.5 + 0.1, 0.5});
        double v3 = split_field(res, ts, gs, params, {0.5 + 0.3, 0.5});
        return v1 - v3;
    };
    double drop_small_alpha = field_drop(0.2);
    double drop_large_alpha = field_drop(0.8);
    CHECK(drop_small_alpha > drop_large_alpha);
}

TEST_CASE("vbar far outside the unit interval is rejected") {
    AlphaParams params = make_alpha_params(0.6);
    TargetSet ts = shield_targets(0.03);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(6, 6);
    // A wildly inconsistent interaction matrix pushes vbar outside [0,1].
    g(0, 0) = 80.0;
    for (int i = 1; i < 6; ++i) g(i, i) = -80.0;
    CHECK_THROWS_AS(split_full(ts, synthetic(g, 6), params), RegimeError);
}
