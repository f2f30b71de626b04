#pragma once

#include <functional>
#include <vector>

namespace fraclap::quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of order n (cached; thread-safe after first use).
const Rule& gauss_legendre(int n);

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive Gauss-Kronrod 15(7) with recursive bisection.
/// Terminates when the local error estimate is below
/// max(abs_tol, rel_tol * |I|) on every subinterval, or at max_depth.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 1e-14,
                          int max_depth = 28);

}  // namespace fraclap::quad
