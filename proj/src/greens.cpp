#include "fraclap/greens.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

double CutoffSpec::chi(double r) const {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    double t = (r1 - r) / (r1 - r0);
    double gt = bump(t);
    double gs = bump(1.0 - t);
    return gt / (gt + gs);
}

CutoffSpec default_cutoff(Point2 x0) {
    double d = dist_to_boundary(x0);
    CutoffSpec c;
    c.r1 = 0.9 * d;
    c.r0 = 0.5 * c.r1;
    return c;
}

void validate_cutoff(const CutoffSpec& cutoff, Point2 x0) {
    if (!(cutoff.r0 > 0.0) || !(cutoff.r1 > cutoff.r0)) {
        throw UsageError("cutoff: need 0 < r0 < r1");
    }
    if (!in_closed_unit_square(x0) || cutoff.r1 >= dist_to_boundary(x0)) {
        throw UsageError(
            "cutoff: support of radius r1 about x0 must lie strictly inside the unit "
            "square");
    }
}

double free_space_u0(Point2 x, Point2 x0, const AlphaParams& params) {
    double r = dist(x, x0);
    if (r < kCoincidentTol) {
        throw RegimeError("free_space_u0: evaluation at the singularity");
    }
    return -params.c_alpha * std::pow(r, 2.0 * params.alpha - 2.0);
}

namespace {

// Angular ring integral of the jump kernel:
//   W(rho, R) = integral_0^{2pi} (rho^2 + R^2 - 2 rho R cos theta)^(-1-alpha) dtheta.
double ring_kernel(double rho, double R, double alpha, double tol) {
    const double a = rho * rho + R * R;
    const double b = 2.0 * rho * R;
    const double p = -(1.0 + alpha);
    return 2.0 * quad::integrate_adaptive(
                     [&](double th) { return std::pow(a - b * std::cos(th), p); }, 0.0,
                     kPi, tol, 1e-300);
}

// Angular integral of a radial-about-x0 profile g(t) over the circle of
// radius s about a point at distance R from x0:
//   integral_0^{2pi} g(t(psi)) dpsi, t = sqrt(s^2 + R^2 - 2 s R cos psi),
// with opposite angles paired analytically. For profiles with g(R) = 0 the
// paired integrand is pointwise O(s^2), so small circles about x do not lose
// the principal-value cancellation to quadrature roundoff.
template <typename G>
double ring_profile_paired(G&& g, double s, double R, double tol) {
    const double a = s * s + R * R;
    const double b = 2.0 * s * R;
    return 2.0 * quad::integrate_adaptive(
                     [&](double psi) {
                         double c = b * std::cos(psi);
                         return g(std::sqrt(std::max(a - c, 0.0))) +
                                g(std::sqrt(std::max(a + c, 0.0)));
                     },
                     0.0, 0.5 * kPi, tol, 1e-300);
}

struct SingularPart {
    const CutoffSpec& cutoff;
    const AlphaParams& params;

    // chi(t) u0(t) and the bracket G(t) = u0(t) (chi(t) - chi(R)) as radial
    // profiles about x0.
    double u0(double t) const {
        return -params.c_alpha * std::pow(t, 2.0 * params.alpha - 2.0);
    }
    double bracket(double t, double chiR) const {
        double dchi = cutoff.chi(t) - chiR;
        if (dchi == 0.0) return 0.0;
        return u0(t) * dchi;
    }
};

// Image-source profile: f(R) = C_alpha * integral over B_{r1}(0) of
// chi u0 times |z - R e1|^(-2-2alpha), for R > r1. rho_m(x) = f(|x - T_m(x0)|)
// and rho_0(x) = f(|x - x0|) outside the cutoff support.
double image_profile(double R, const CutoffSpec& cutoff, const AlphaParams& params,
                     const QuadratureSpec& quad) {
    const double a = params.alpha;
    const double r1 = cutoff.r1;
    // rho = r1 t^(1/(2 alpha)) absorbs the rho^(2 alpha - 1) radial factor.
    const double expo = 1.0 / (2.0 * a);
    double integral = quad::integrate_gl(
        [&](double t) {
            double rho = r1 * std::pow(t, expo);
            double c = cutoff.chi(rho);
            if (c == 0.0) return 0.0;
            return c * ring_kernel(rho, R, a, quad.angular_tol);
        },
        0.0, 1.0, quad.radial);
    return -params.C_alpha * params.c_alpha * std::pow(r1, 2.0 * a) / (2.0 * a) * integral;
}

// rho_0 for R <= r1. The integrand u0(t) (chi(t) - chi(R)) is radial about
// x0 and vanishes at t = R. A smooth radial mask eta confines the integrable
// u0 singularity to a patch handled in polar coordinates about x0; the rest,
// (1 - eta) u0 (chi - chi(R)), is smooth everywhere and integrated in polar
// coordinates about x with opposite angles paired, which realizes the
// principal value at y = x without any angular clipping.
double rho0_interior(double R, const CutoffSpec& cutoff, const AlphaParams& params,
                     const QuadratureSpec& quad) {
    const double a = params.alpha;
    const double chiR = cutoff.chi(R);
    const SingularPart sp{cutoff, params};
    const double tol = quad.angular_tol;

    // The u0 singularity matters only when the bracket is nonzero near x0,
    // i.e. when R is past the plateau.
    const bool need_mask = R > cutoff.r0;
    const double d_out = need_mask ? 0.5 * R : 0.0;
    const double d_in = 0.5 * d_out;
    auto eta = [&](double t) {
        if (!need_mask || t >= d_out) return 0.0;
        if (t <= d_in) return 1.0;
        double u = (d_out - t) / (d_out - d_in);
        double gu = bump(u);
        return gu / (gu + bump(1.0 - u));
    };

    double patch = 0.0;
    if (need_mask) {
        // rho = d_out t^(1/(2 alpha)) absorbs the u0 radial factor; the
        // kernel ring is smooth because the patch keeps |y - x| >= R/2.
        const double expo = 1.0 / (2.0 * a);
        patch = quad::integrate_gl(
            [&](double t) {
                double rho = d_out * std::pow(t, expo);
                double w = eta(rho) * (cutoff.chi(rho) - chiR);
                if (w == 0.0) return 0.0;
                return w * ring_kernel(rho, R, a, tol);
            },
            0.0, 1.0, quad.radial);
        patch *= -params.c_alpha * std::pow(d_out, 2.0 * a) / (2.0 * a);
    }

    auto masked = [&](double t) {
        double w = sp.bracket(t, chiR);
        if (w == 0.0) return 0.0;
        return (1.0 - eta(t)) * w;
    };

    // Polar about x. s = s_break tau^(1/(1-alpha)) smooths the s^(1-2 alpha)
    // endpoint produced by the paired O(s^2) angular integrals.
    //
    // Below s_taylor the pairing cancellation falls under the floating-point
    // noise floor while s^(-1-2 alpha) amplifies it, so that end is replaced
    // by the analytic limit: the circle mean of the profile is
    // m(R) + (s^2/4) (m'' + m'/R) + O(s^4) and m(R) = 0.
    const double s_break = 0.5 * std::max(R, cutoff.r0);
    const double pexp = 1.0 / (1.0 - a);
    const double s_taylor = 1e-4 * s_break;
    double core = 0.0;
    {
        const double hfd = std::max(1e-4, 1e-3 * R);
        if (R > 4.0 * hfd) {
            double mp = masked(R + hfd), mm = masked(R - hfd);
            double mp2 = masked(R + 2.0 * hfd), mm2 = masked(R - 2.0 * hfd);
            double d1 = (-mp2 + 8.0 * mp - 8.0 * mm + mm2) / (12.0 * hfd);
            double d2 = (-mp2 + 16.0 * mp + 16.0 * mm - mm2) / (12.0 * hfd * hfd);
            double lap = d2 + d1 / R;
            core += 0.5 * kPi * lap * std::pow(s_taylor, 2.0 - 2.0 * a) / (2.0 - 2.0 * a);
        }
    }
    const double tau_cut = std::pow(s_taylor / s_break, 1.0 / pexp);
    core += quad::integrate_gl(
        [&](double tau) {
            double s = s_break * std::pow(tau, pexp);
            double ang = ring_profile_paired(masked, s, R, tol);
            if (ang == 0.0) return 0.0;
            double jac = s_break * pexp * std::pow(tau, pexp - 1.0);
            return std::pow(s, -1.0 - 2.0 * a) * ang * jac;
        },
        tau_cut, 1.0, quad.radial);

    double outer = 0.0;
    double lo = s_break;
    while (lo < quad.far_radius) {
        double hi = std::min(2.0 * lo, quad.far_radius);
        outer += quad::integrate_gl(
            [&](double s) {
                double ang = ring_profile_paired(masked, s, R, tol);
                return std::pow(s, -1.0 - 2.0 * a) * ang;
            },
            lo, hi, quad.radial);
        lo = hi;
    }

    // Beyond the far radius the bracket has collapsed to -chi(R) u0.
    const double S = quad.far_radius;
    double tail = 2.0 * kPi * chiR * params.c_alpha *
                  (0.5 / (S * S) + 0.25 * (1.0 - a) * (1.0 - a) * R * R / (S * S * S * S));

    return params.C_alpha * (patch + core + outer + tail);
}

double rho0_profile(double R, const CutoffSpec& cutoff, const AlphaParams& params,
                    const QuadratureSpec& quad) {
    if (R > cutoff.r1) {
        return image_profile(R, cutoff, params, quad);
    }
    return rho0_interior(R, cutoff, params, quad);
}

// Natural cubic spline over strictly increasing knots.
class Spline {
  public:
    Spline() = default;
    Spline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)), y2_(x_.size(), 0.0) {
        const std::size_t n = x_.size();
        std::vector<double> u(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
            double p = sig * y2_[i - 1] + 2.0;
            y2_[i] = (sig - 1.0) / p;
            u[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) -
                   (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
            u[i] = (6.0 * u[i] / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
        }
        for (std::size_t k = n - 1; k-- > 1;) {
            y2_[k] = y2_[k] * y2_[k + 1] + u[k];
        }
    }

    double operator()(double x) const {
        auto hi = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t k = std::clamp<std::size_t>(hi - x_.begin(), 1, x_.size() - 1);
        double h = x_[k] - x_[k - 1];
        double A = (x_[k] - x) / h;
        double B = 1.0 - A;
        return A * y_[k - 1] + B * y_[k] +
               ((A * A * A - A) * y2_[k - 1] + (B * B * B - B) * y2_[k]) * h * h / 6.0;
    }

  private:
    std::vector<double> x_, y_, y2_;
};

// Per-source tabulation of the two radial profiles plus the cutoff moments
// driving the far-field completion of the image sum.
struct SourceTables {
    CutoffSpec cutoff;
    AlphaParams params;
    double I0 = 0.0;      // integral of chi u0
    double I2 = 0.0;      // integral of chi u0 |z|^2
    double f_min = 0.0;   // table domain (f_min, f_max] in log R
    double f_max = 0.0;
    Spline f;             // log R -> f(R) R^(2+2 alpha)
    Spline rho0;          // R in [-r1, r1] mirrored -> rho_0
    double tail_shift = 0.0;  // analytic image-sum tail beyond the shell cap

    double f_eval(double R) const {
        double scaled;
        if (R <= f_max) {
            scaled = f(std::log(std::max(R, f_min)));
        } else {
            // Two-moment far-field expansion; the odd moment vanishes by symmetry.
            scaled = params.C_alpha *
                     (I0 + (1.0 + params.alpha) * (1.0 + params.alpha) * I2 / (R * R));
        }
        return scaled * std::pow(R * R, -(1.0 + params.alpha));
    }

    double rho0_eval(double R) const {
        if (R > cutoff.r1) return f_eval(R);
        return rho0(R);
    }
};

SourceTables build_source_tables(const CutoffSpec& cutoff, const AlphaParams& params,
                                 const QuadratureSpec& quad) {
    SourceTables t;
    t.cutoff = cutoff;
    t.params = params;
    const double a = params.alpha;
    const double r1 = cutoff.r1;

    // Moments of chi u0 (radial substitution as in image_profile).
    const double expo = 1.0 / (2.0 * a);
    t.I0 = -params.c_alpha * 2.0 * kPi * std::pow(r1, 2.0 * a) / (2.0 * a) *
           quad::integrate_gl(
               [&](double s) { return cutoff.chi(r1 * std::pow(s, expo)); }, 0.0, 1.0,
               128);
    t.I2 = -params.c_alpha * 2.0 * kPi *
           quad::integrate_gl(
               [&](double rho) {
                   return cutoff.chi(rho) * std::pow(rho, 2.0 * a + 1.0);
               },
               0.0, r1, 128);

    // f table on a log-spaced grid; store f R^(2+2 alpha), which limits to
    // C_alpha (I0 + ...) and interpolates well.
    const double Rlo = r1 * (1.0 + 1e-9);
    const double Rhi = std::max(8.0, 4.0 * r1);
    const int nf = 700;
    std::vector<double> xs(nf), ys(nf);
    for (int i = 0; i < nf; ++i) {
        double lr = std::log(Rlo) + (std::log(Rhi) - std::log(Rlo)) * i / (nf - 1);
        double R = std::exp(lr);
        xs[i] = lr;
        ys[i] = image_profile(R, cutoff, params, quad) * std::pow(R * R, 1.0 + a);
    }
    t.f_min = Rlo;
    t.f_max = Rhi * (1.0 - 1e-12);
    t.f = Spline(std::move(xs), std::move(ys));

    // rho0 table mirrored about R = 0 so the spline sees the even symmetry.
    // The profile has an O(1)-width peak inside the transition band, so the
    // knot spacing must stay well under that scale.
    const int nr = 640;
    std::vector<double> rx, ry;
    rx.reserve(2 * nr - 1);
    ry.reserve(2 * nr - 1);
    std::vector<double> vals(nr);
    for (int i = 0; i < nr; ++i) {
        double R = r1 * i / (nr - 1);
        vals[i] = rho0_profile(R, cutoff, params, quad);
    }
    for (int i = nr - 1; i >= 1; --i) {
        rx.push_back(-r1 * i / (nr - 1));
        ry.push_back(vals[i]);
    }
    for (int i = 0; i < nr; ++i) {
        rx.push_back(r1 * i / (nr - 1));
        ry.push_back(vals[i]);
    }
    t.rho0 = Spline(std::move(rx), std::move(ry));

    // Analytic completion of the image sum beyond the explicit shell cap L:
    //   sum_{|m|_inf > L} f(|x - T_m|) ~ C_alpha I0 * integral_{|y|_inf > L} |y|^(-2-2a)
    const double L = quad.tail_m + 0.5;
    double wedge = quad::integrate_gl(
        [&](double th) { return std::pow(std::cos(th), 2.0 * a); }, 0.0, kPi / 4.0, 64);
    t.tail_shift =
        params.C_alpha * t.I0 * (8.0 / (2.0 * a)) * std::pow(L, -2.0 * a) * wedge;
    return t;
}

}  // namespace

double rho_m(const ImageMap& map, std::array<int, 2> m, Point2 x, Point2 x0,
             const CutoffSpec& cutoff, const AlphaParams& params,
             const QuadratureSpec& quad) {
    if (m[0] == 0 && m[1] == 0) {
        throw UsageError("rho_m: m must be nonzero (use rho_0 for the m = 0 term)");
    }
    validate_cutoff(cutoff, x0);
    Point2 c = image_point(map, m, x0);
    return image_profile(dist(x, c), cutoff, params, quad);
}

double rho_0(Point2 x, Point2 x0, const CutoffSpec& cutoff, const AlphaParams& params,
             const QuadratureSpec& quad) {
    validate_cutoff(cutoff, x0);
    return rho0_profile(dist(x, x0), cutoff, params, quad);
}

GreensField solve_r_tilde(const OperatorMatrix& op, Point2 x0) {
    return solve_r_tilde(op, x0, default_cutoff(x0));
}

GreensField solve_r_tilde(const OperatorMatrix& op, Point2 x0, const CutoffSpec& cutoff,
                          const QuadratureSpec& quad, double min_r1_over_h) {
    validate_cutoff(cutoff, x0);
    const GridSpec grid = op.grid;
    const double h = grid.h();
    if (cutoff.r1 < min_r1_over_h * h) {
        std::ostringstream msg;
        msg << "solve_r_tilde: r1 = " << cutoff.r1 << " below " << min_r1_over_h
            << " grid spacings; refine the grid or move x0 away from the boundary";
        throw RegimeError(msg.str());
    }
    AlphaParams params = make_alpha_params(op.alpha);
    SourceTables tables = build_source_tables(cutoff, params, quad);

    // Image points out to the explicit shell cap (the rest is tail_shift).
    const ImageMap map{op.boundary, quad.tail_m};
    std::vector<Point2> images;
    images.reserve((2 * quad.tail_m + 1) * (2 * quad.tail_m + 1) - 1);
    for (int m1 = -quad.tail_m; m1 <= quad.tail_m; ++m1) {
        for (int m2 = -quad.tail_m; m2 <= quad.tail_m; ++m2) {
            if (m1 == 0 && m2 == 0) continue;
            images.push_back(image_point(map, {m1, m2}, x0));
        }
    }

    const int N = grid.size();
    Eigen::VectorXd rhs(N);
    for (int p = 0; p < N; ++p) {
        Point2 x = grid.node(p);
        double acc = -1.0 - tables.tail_shift - tables.rho0_eval(dist(x, x0));
        for (const Point2& c : images) {
            acc -= tables.f_eval(dist(x, c));
        }
        rhs(p) = acc;
    }

    GreensField field;
    field.grid = grid;
    field.boundary = op.boundary;
    field.params = params;
    field.x0 = x0;
    field.cutoff = cutoff;
    field.m_max = op.m_max;
    field.rhs = rhs;
    field.rhs_mean = rhs.mean();  // h^2 n^2 = 1, so the mean is the quadrature sum

    // Discrete integral constraint: w^T r_tilde = -h^2 sum chi u0 over nodes,
    // which makes the reconstructed G have exactly zero discrete mean.
    double target = 0.0;
    for (int p = 0; p < N; ++p) {
        Point2 x = grid.node(p);
        double r = dist(x, x0);
        if (r < kCoincidentTol) {
            throw UsageError("solve_r_tilde: x0 coincides with a grid node; shift it");
        }
        double c = cutoff.chi(r);
        if (c > 0.0) target -= c * free_space_u0(x, x0, params);
    }
    target *= h * h;

    Eigen::MatrixXd M(N + 1, N + 1);
    M.topLeftCorner(N, N) = op.entries;
    M.block(0, N, N, 1).setConstant(h * h);
    M.block(N, 0, 1, N).setConstant(h * h);
    M(N, N) = 0.0;

    Eigen::VectorXd b(N + 1);
    b.head(N) = rhs.array() - field.rhs_mean;
    b(N) = target;

    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(M);  // factor in place
    double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "solve_r_tilde: bordered system near-singular, rcond = " << rcond;
        throw SolverError(msg.str());
    }
    Eigen::VectorXd sol = lu.solve(b);
    field.r_tilde = sol.head(N);
    field.multiplier = sol(N);
    return field;
}

namespace {

int ghost_index(int i, int n, BoundaryKind boundary) {
    if (i >= 0 && i < n) return i;
    if (boundary == BoundaryKind::Periodic) {
        return ((i % n) + n) % n;
    }
    if (i < 0) return -1 - i;
    return 2 * n - 1 - i;
}

}  // namespace

double interpolate_r_tilde(const GreensField& field, Point2 x) {
    const int n = field.grid.n;
    const double h = field.grid.h();
    double u = x.x1 / h - 0.5;
    double v = x.x2 / h - 0.5;
    int i0 = static_cast<int>(std::floor(u));
    int j0 = static_cast<int>(std::floor(v));
    double fu = u - i0;
    double fv = v - j0;
    double val = 0.0;
    for (int di = 0; di <= 1; ++di) {
        for (int dj = 0; dj <= 1; ++dj) {
            int gi = ghost_index(i0 + di, n, field.boundary);
            int gj = ghost_index(j0 + dj, n, field.boundary);
            double w = (di == 0 ? 1.0 - fu : fu) * (dj == 0 ? 1.0 - fv : fv);
            val += w * field.r_tilde(field.grid.index(gi, gj));
        }
    }
    return val;
}

double reconstruct_G(const GreensField& field, Point2 x) {
    // Under periodic boundaries the singular part lives on every translate of
    // the source; the minimum-image displacement selects the one copy whose
    // cutoff ball can contain x (2 r1 < 1).
    double d1 = x.x1 - field.x0.x1;
    double d2 = x.x2 - field.x0.x2;
    if (field.boundary == BoundaryKind::Periodic) {
        d1 -= std::round(d1);
        d2 -= std::round(d2);
    }
    double r = std::hypot(d1, d2);
    if (r < kCoincidentTol) {
        throw RegimeError("reconstruct_G: evaluation at the singularity");
    }
    double singular = 0.0;
    double c = field.cutoff.chi(r);
    if (c > 0.0) {
        singular = -c * field.params.c_alpha * std::pow(r, 2.0 * field.params.alpha - 2.0);
    }
    return singular + interpolate_r_tilde(field, x);
}

RegularPart regular_part(const GreensField& field) {
    const double h = field.grid.h();
    if (field.cutoff.r0 < 2.0 * h) {
        throw RegimeError(
            "regular_part: r0 below 2h, the gradient stencil leaves the cutoff plateau");
    }
    RegularPart rp;
    rp.R = interpolate_r_tilde(field, field.x0);
    Point2 x0 = field.x0;
    rp.gradR[0] = (interpolate_r_tilde(field, {x0.x1 + h, x0.x2}) -
                   interpolate_r_tilde(field, {x0.x1 - h, x0.x2})) /
                  (2.0 * h);
    rp.gradR[1] = (interpolate_r_tilde(field, {x0.x1, x0.x2 + h}) -
                   interpolate_r_tilde(field, {x0.x1, x0.x2 - h})) /
                  (2.0 * h);
    return rp;
}

void write_field_csv(const GreensField& field, std::ostream& out,
                     const std::string& config_hash) {
    const int n = field.grid.n;
    // Locate the node nearest the source; G is left blank there.
    int nearest = 0;
    double best = std::numeric_limits<double>::max();
    for (int p = 0; p < field.grid.size(); ++p) {
        double d = dist(field.grid.node(p), field.x0);
        if (d < best) {
            best = d;
            nearest = p;
        }
    }
    out << "# config " << config_hash << "\n";
    out << "# boundary " << to_string(field.boundary) << " alpha " << field.params.alpha
        << " n " << n << " m_max " << field.m_max << " x0 " << field.x0.x1 << ","
        << field.x0.x2 << " r0 " << field.cutoff.r0 << " r1 " << field.cutoff.r1 << "\n";
    out << "x1,x2,r_tilde,rhs,G\n";
    char buf[256];
    for (int p = 0; p < field.grid.size(); ++p) {
        Point2 x = field.grid.node(p);
        if (p == nearest) {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,", x.x1, x.x2,
                          field.r_tilde(p), field.rhs(p));
        } else {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,%.15g", x.x1, x.x2,
                          field.r_tilde(p), field.rhs(p), reconstruct_G(field, x));
        }
        out << buf << "\n";
    }
}

}  // namespace fraclap
