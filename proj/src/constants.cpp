#include "fraclap/constants.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients for g = 7, n = 9 (Godfrey's table).
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double lanczos_gamma(double x) {
    // Valid for x >= 0.5; callers reflect smaller arguments.
    double s = kLanczos[0];
    for (int k = 1; k < 9; ++k) {
        s += kLanczos[k] / (x - 1.0 + k);
    }
    double base = x + 6.5;
    return std::sqrt(2.0 * kPi) * std::pow(base, x - 0.5) * std::exp(-base) * s;
}

}  // namespace

double gamma_positive(double x) {
    if (!(x > 0.0)) {
        throw UsageError("gamma_positive requires x > 0");
    }
    if (x < 0.5) {
        // Reflection formula keeps the Lanczos argument in its sweet spot.
        return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
    }
    return lanczos_gamma(x);
}

AlphaParams make_alpha_params(double alpha, bool allow_extreme) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream msg;
        msg << "alpha = " << alpha << " outside the admissible open interval (0, 1)";
        throw UsageError(msg.str());
    }
    if (!allow_extreme && (alpha < 0.05 - 1e-12 || alpha > 0.95 + 1e-12)) {
        std::ostringstream msg;
        msg << "alpha = " << alpha
            << " outside the supported window [0.05, 0.95]; pass allow_extreme to override";
        throw UsageError(msg.str());
    }

    AlphaParams p;
    p.alpha = alpha;
    p.c_alpha = gamma_positive(1.0 - alpha) /
                (std::pow(4.0, alpha) * kPi * gamma_positive(alpha));
    // |Gamma(-alpha)| = Gamma(2-alpha) / (alpha (1-alpha)) for alpha in (0,1).
    double abs_gamma_neg = gamma_positive(2.0 - alpha) / (alpha * (1.0 - alpha));
    p.C_alpha = std::pow(4.0, alpha) * gamma_positive(1.0 + alpha) / (kPi * abs_gamma_neg);
    p.chi_alpha = kPi * (1.0 - alpha) / std::sin((1.0 - alpha) * kPi);
    return p;
}

}  // namespace fraclap
