#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>

#include "fraclap/constants.hpp"
#include "fraclap/geometry.hpp"
#include "fraclap/lattice.hpp"
#include "fraclap/operator.hpp"

namespace fraclap {

/// Radial C-infinity cutoff: 1 on [0, r0], 0 on [r1, inf), monotone smooth
/// transition in between built from exp(-1/t) bump ratios.
struct CutoffSpec {
    double r0 = 0.0;
    double r1 = 0.0;

    double chi(double r) const;
};

/// Default cutoff for a source at x0: r1 = 0.9 dist(x0, boundary), r0 = r1/2,
/// keeping the support strictly inside the unit square.
CutoffSpec default_cutoff(Point2 x0);

/// Throws unless 0 < r0 < r1 and the closed disk of radius r1 about x0 lies
/// strictly inside the unit square.
void validate_cutoff(const CutoffSpec& cutoff, Point2 x0);

/// Quadrature controls for the singular-part integrals.
struct QuadratureSpec {
    int radial = 64;             // Gauss-Legendre nodes per radial panel
    double angular_tol = 1e-9;   // relative tolerance of angular integrals
    double far_radius = 64.0;    // truncation radius of unbounded integrals
    int tail_m = 64;             // image shells summed explicitly in the rhs

    bool operator==(const QuadratureSpec&) const = default;
};

/// Free-space singular part u0(x - x0) = -c_alpha |x - x0|^(2 alpha - 2).
double free_space_u0(Point2 x, Point2 x0, const AlphaParams& params);

/// rho_m for m != 0: the nonlocal operator applied to the cutoff singular
/// part translated to the image cell m, evaluated at x in the unit square.
/// Depends on x only through |x - T_m(x0)|.
double rho_m(const ImageMap& map, std::array<int, 2> m, Point2 x, Point2 x0,
             const CutoffSpec& cutoff, const AlphaParams& params,
             const QuadratureSpec& quad = {});

/// rho_0: the bounded remainder of the m = 0 term after the delta function is
/// extracted. Finite for every x including x = x0; radially symmetric about x0.
double rho_0(Point2 x, Point2 x0, const CutoffSpec& cutoff, const AlphaParams& params,
             const QuadratureSpec& quad = {});

/// Grid solution of the smooth constrained problem for the remainder
/// R-tilde, together with the data needed to reconstruct the Green's function.
struct GreensField {
    GridSpec grid;
    BoundaryKind boundary = BoundaryKind::Periodic;
    AlphaParams params;
    Point2 x0;
    CutoffSpec cutoff;
    int m_max = 0;
    Eigen::VectorXd r_tilde;
    Eigen::VectorXd rhs;      // right-hand side before mean projection
    double rhs_mean = 0.0;    // h^2 sum of rhs before projection
    double multiplier = 0.0;  // Lagrange multiplier of the bordered solve
};

/// Build the right-hand side -1 - sum_m rho_m - rho_0 at every node (image sum
/// completed by a far-field moment expansion), project out its residual mean,
/// and solve the symmetric bordered system
///   [A  w; w^T  0] [r_tilde; mu] = [rhs; -h^2 sum chi u0]
/// with quadrature weights w = h^2, which enforces the integral constraint.
GreensField solve_r_tilde(const OperatorMatrix& op, Point2 x0, const CutoffSpec& cutoff,
                          const QuadratureSpec& quad = {}, double min_r1_over_h = 4.0);
GreensField solve_r_tilde(const OperatorMatrix& op, Point2 x0);

/// Bilinear interpolation of r_tilde with reflecting (Neumann) or wrapping
/// (periodic) ghost values at the walls.
double interpolate_r_tilde(const GreensField& field, Point2 x);

/// G(x; x0) = chi(|x - x0|) u0(x - x0) + interpolated r_tilde(x). x must not
/// coincide with the source.
double reconstruct_G(const GreensField& field, Point2 x);

struct RegularPart {
    double R = 0.0;
    std::array<double, 2> gradR = {0.0, 0.0};
};

/// Regular part R(x0; x0) and its gradient at the singularity, from r_tilde
/// inside the cutoff plateau. Requires r0 >= 2h so the centered stencil stays
/// on the plateau.
RegularPart regular_part(const GreensField& field);

/// CSV dump `x1,x2,r_tilde,rhs,G` (G blank at the node nearest x0), 15
/// significant digits, preceded by `#`-prefixed metadata lines.
void write_field_csv(const GreensField& field, std::ostream& out,
                     const std::string& config_hash);

}  // namespace fraclap
