#pragma once

namespace fraclap {

/// The alpha-dependent coefficients of the Levy-flight index alpha in (0,1):
///
///   c_alpha   = Gamma(1-alpha) / (4^alpha pi Gamma(alpha))
///               coefficient of the free-space singularity -c_alpha r^(2alpha-2)
///   C_alpha   = 4^alpha Gamma(1+alpha) / (pi |Gamma(-alpha)|)
///               kernel normalization making the image-sum operator agree with
///               the spectral fractional Laplacian on Laplacian eigenfunctions
///   chi_alpha = pi (1-alpha) / sin((1-alpha) pi)
///               inner-problem constant for a circular target
struct AlphaParams {
    double alpha = 0.0;
    double c_alpha = 0.0;
    double C_alpha = 0.0;
    double chi_alpha = 0.0;
};

/// Evaluate the closed forms above.
///
/// alpha must lie strictly inside (0,1); values outside [0.05, 0.95] are
/// rejected unless allow_extreme is set, since Gamma(-alpha) conditioning and
/// the singular quadratures degrade near the endpoints.
AlphaParams make_alpha_params(double alpha, bool allow_extreme = false);

/// Gamma(x) for x > 0 via a Lanczos approximation (g = 7, 9 terms),
/// relative error below 1e-13 on (0, 20].
double gamma_positive(double x);

}  // namespace fraclap
