#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fraclap/capture.hpp"
#include "fraclap/errors.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

TargetSet two_targets(BoundaryKind bk, double eps, Point2 a, Point2 b) {
    TargetSet ts;
    ts.eps = eps;
    ts.boundary = bk;
    ts.separation_factor = 5.0;
    ts.targets.push_back({a, 1.0, TargetRole::Obstacle});
    ts.targets.push_back({b, 1.0, TargetRole::Obstacle});
    return ts;
}

InteractionMatrix synthetic(const Eigen::MatrixXd& g, const Eigen::VectorXd& k_inv) {
    InteractionMatrix im;
    im.g = g;
    im.k_inv = k_inv;
    return im;
}

}  // namespace

TEST_CASE("target set validation") {
    TargetSet empty;
    empty.eps = 0.03;
    CHECK_THROWS_AS(validate_targets(empty), UsageError);

    TargetSet ts = two_targets(BoundaryKind::Periodic, 0.03, {0.25, 0.25}, {0.75, 0.75});
    CHECK_NOTHROW(validate_targets(ts));
    ts.eps = 0.6;
    CHECK_THROWS_AS(validate_targets(ts), UsageError);
    ts.eps = 0.03;
    ts.targets[0].kappa = 50.0;
    CHECK_THROWS_AS(validate_targets(ts), UsageError);
    ts.targets[0].kappa = 1.0;

    // Separation guard: regime error naming the well-separated assumption.
    TargetSet close = two_targets(BoundaryKind::Periodic, 0.03, {0.5, 0.5}, {0.55, 0.55});
    close.separation_factor = 10.0;
    CHECK_THROWS_WITH_AS(validate_targets(close), doctest::Contains("well-separated"),
                         RegimeError);

    // Boundary distance guard applies under reflecting walls only.
    TargetSet near_wall = two_targets(BoundaryKind::Neumann, 0.03, {0.1, 0.5},
                                      {0.7, 0.5});
    near_wall.separation_factor = 10.0;
    CHECK_THROWS_AS(validate_targets(near_wall), RegimeError);
    near_wall.boundary = BoundaryKind::Periodic;
    CHECK_NOTHROW(validate_targets(near_wall));
}

TEST_CASE("single target reduces to the scalar formula") {
    AlphaParams params = make_alpha_params(0.6);
    TargetSet ts;
    ts.eps = 0.03;
    ts.boundary = BoundaryKind::Neumann;
    ts.targets.push_back({{0.5, 0.5}, 1.0, TargetRole::Obstacle});

    const double R = 0.598115868896;  // heat-kernel oracle value
    Eigen::MatrixXd g(1, 1);
    g(0, 0) = R;
    InteractionMatrix im = synthetic(g, Eigen::VectorXd::Ones(1));

    double lead = params.c_alpha * params.chi_alpha * std::pow(0.03, 2.0 * 0.6 - 2.0);
    GmfptResult full = gmfpt_full(ts, im, params);
    double two = gmfpt_two_term(ts, im, params);
    CHECK(two == doctest::Approx(lead - R).epsilon(1e-13));
    CHECK(full.ubar == doctest::Approx(lead - R).epsilon(1e-13));
    CHECK(full.s.size() == 1);
    CHECK(full.s(0) == doctest::Approx(params.c_alpha).epsilon(1e-12));
    CHECK(full.consistency_defect < 1e-10);
    CHECK(full.ubar > 0.0);
}

TEST_CASE("N identical targets with zero interaction scale the leading term") {
    AlphaParams params = make_alpha_params(0.5);
    TargetSet ts;
    ts.eps = 0.02;
    ts.boundary = BoundaryKind::Periodic;
    ts.separation_factor = 5.0;
    ts.targets.push_back({{0.2, 0.2}, 1.0, TargetRole::Obstacle});
    ts.targets.push_back({{0.8, 0.2}, 1.0, TargetRole::Obstacle});
    ts.targets.push_back({{0.2, 0.8}, 1.0, TargetRole::Obstacle});
    ts.targets.push_back({{0.8, 0.8}, 1.0, TargetRole::Obstacle});

    InteractionMatrix im =
        synthetic(Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Ones(4));
    double lead = params.c_alpha * params.chi_alpha * std::pow(0.02, 2.0 * 0.5 - 2.0);
    GmfptResult full = gmfpt_full(ts, im, params);
    CHECK(full.ubar == doctest::Approx(lead / 4.0).epsilon(1e-12));
    CHECK(gmfpt_two_term(ts, im, params) == doctest::Approx(lead / 4.0).epsilon(1e-12));
    // All source strengths equal by symmetry.
    for (int i = 1; i < 4; ++i) {
        CHECK(full.s(i) == doctest::Approx(full.s(0)).epsilon(1e-12));
    }
}

TEST_CASE("kappa scaling enters through K^(-1)") {
    AlphaParams params = make_alpha_params(0.6);
    TargetSet ts;
    ts.eps = 0.03;
    ts.boundary = BoundaryKind::Periodic;
    ts.separation_factor = 5.0;
    ts.targets.push_back({{0.25, 0.25}, 2.0, TargetRole::Obstacle});
    Eigen::VectorXd k_inv(1);
    k_inv(0) = std::pow(2.0, 2.0 - 2.0 * params.alpha);
    InteractionMatrix im = synthetic(Eigen::MatrixXd::Zero(1, 1), k_inv);
    double lead = params.c_alpha * params.chi_alpha * std::pow(0.03, 2.0 * 0.6 - 2.0);
    CHECK(gmfpt_two_term(ts, im, params) ==
          doctest::Approx(lead / k_inv(0)).epsilon(1e-12));
}

TEST_CASE("removing a target never decreases the capture time") {
    AlphaParams params = make_alpha_params(0.6);
    const double R = 0.6;
    const double g12 = -0.1;
    TargetSet one;
    one.eps = 0.03;
    one.boundary = BoundaryKind::Periodic;
    one.separation_factor = 5.0;
    one.targets.push_back({{0.25, 0.25}, 1.0, TargetRole::Obstacle});
    TargetSet two = one;
    two.targets.push_back({{0.75, 0.75}, 1.0, TargetRole::Obstacle});

    Eigen::MatrixXd g1(1, 1);
    g1 << R;
    Eigen::MatrixXd g2(2, 2);
    g2 << R, g12, g12, R;
    double u1 = gmfpt_full(one, synthetic(g1, Eigen::VectorXd::Ones(1)), params).ubar;
    double u2 = gmfpt_full(two, synthetic(g2, Eigen::VectorXd::Ones(2)), params).ubar;
    CHECK(u2 < u1);
}

TEST_CASE("two-term and full solutions converge together as eps shrinks") {
    AlphaParams params = make_alpha_params(0.6);
    Eigen::MatrixXd g(2, 2);
    g << 0.598, -0.137, -0.137, 0.519;
    InteractionMatrix im = synthetic(g, Eigen::VectorXd::Ones(2));
    TargetSet ts = two_targets(BoundaryKind::Periodic, 0.05, {0.25, 0.25}, {0.75, 0.75});
    double prev = 1e9;
    for (double eps : {0.05, 0.03, 0.02}) {
        ts.eps = eps;
        double diff = std::abs(gmfpt_full(ts, im, params).ubar -
                               gmfpt_two_term(ts, im, params));
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("regime warning fires when the correction competes with the lead") {
    AlphaParams params = make_alpha_params(0.8);
    TargetSet ts;
    ts.eps = 0.05;
    ts.boundary = BoundaryKind::Periodic;
    ts.separation_factor = 5.0;
    ts.targets.push_back({{0.5, 0.5}, 1.0, TargetRole::Obstacle});
    Eigen::MatrixXd g(1, 1);
    g << 1.5;  // artificially large interaction scale
    GmfptResult res = gmfpt_full(ts, synthetic(g, Eigen::VectorXd::Ones(1)), params);
    CHECK(res.regime_warning);
    CHECK(!res.warning.empty());
}

TEST_CASE("interaction matrix from real Green's solves is nearly symmetric") {
    TargetSet ts = two_targets(BoundaryKind::Periodic, 0.03, {0.25, 0.25}, {0.75, 0.75});
    AlphaParams params = make_alpha_params(0.6);
    auto op = assemble_cached({32}, BoundaryKind::Periodic, 0.6, 6);
    GreensSet gs = solve_greens_set(ts, *op);
    InteractionMatrix im = build_interaction(ts, gs, params);
    CHECK(im.symmetry_defect < 1e-2);
    CHECK(im.g(0, 1) == doctest::Approx(im.g(1, 0)));  // symmetrized by construction
    // Off-diagonal against the heat-kernel oracle.
    double ref = oracle::heat_kernel_greens(0.6, 0.25, 0.25, 0.75, 0.75,
                                            /*neumann=*/false, /*regular=*/false);
    CHECK(std::abs(im.g(0, 1) - ref) < 0.05 * std::max(0.1, std::abs(ref)));
    // Symmetric configuration gives equal source strengths.
    GmfptResult full = gmfpt_full(ts, im, params);
    CHECK(full.s(0) == doctest::Approx(full.s(1)).epsilon(1e-8));
    CHECK(full.s.sum() == doctest::Approx(params.c_alpha).epsilon(1e-10));
}

TEST_CASE("two-grid Richardson extrapolation tightens the regular part") {
    TargetSet ts;
    ts.eps = 0.03;
    ts.boundary = BoundaryKind::Periodic;
    ts.targets.push_back({{0.5, 0.5}, 1.0, TargetRole::Obstacle});
    AlphaParams params = make_alpha_params(0.6);
    auto op24 = assemble_cached({24}, BoundaryKind::Periodic, 0.6, 6);
    auto op48 = assemble_cached({48}, BoundaryKind::Periodic, 0.6, 6);
    GreensSet g24 = solve_greens_set(ts, *op24);
    GreensSet g48 = solve_greens_set(ts, *op48);
    InteractionMatrix plain = build_interaction(ts, g48, params);
    InteractionMatrix extrap = build_interaction_richardson(ts, g24, g48, params);
    const double truth = 0.598115868896;  // heat-kernel oracle
    CHECK(std::abs(extrap.g(0, 0) - truth) < std::abs(plain.g(0, 0) - truth));
    CHECK_THROWS_AS(build_interaction_richardson(ts, g48, g24, params), UsageError);
}
