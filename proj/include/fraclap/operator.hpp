#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <memory>

#include "fraclap/geometry.hpp"

namespace fraclap {

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{4} << 30;  // 4 GiB

/// Dense discretization of the nonlocal operator on a uniform cell-centered
/// grid. Row index = evaluation node, column index = integration node.
///
/// Off-diagonal entry (p,q) = C_alpha h^2 sum_{|m|_inf <= m_max}
/// |T_m(x_q) - x_p|^(-2-2 alpha); the diagonal is the negated off-diagonal
/// row sum, so the matrix is symmetric with exactly zero row sums.
struct OperatorMatrix {
    GridSpec grid;
    BoundaryKind boundary = BoundaryKind::Periodic;
    double alpha = 0.0;
    int m_max = 0;
    Eigen::MatrixXd entries;
};

/// Assemble the n^2 x n^2 matrix. Throws ResourceError before allocating if
/// the estimated n^4 * 8 bytes exceed memory_cap.
OperatorMatrix assemble(GridSpec grid, BoundaryKind boundary, double alpha, int m_max,
                        std::size_t memory_cap = kDefaultMemoryCap);

/// Matrix-vector product; field must have length n^2.
Eigen::VectorXd apply(const OperatorMatrix& op, const Eigen::VectorXd& field);

/// Relative residual of the discrete operator on the (k,l) Laplacian
/// eigenmode: ||A phi + |lambda|^alpha phi|| / || |lambda|^alpha phi ||.
/// Neumann modes are cos(k pi x1) cos(l pi x2); periodic modes are
/// cos(2 pi k x1) cos(2 pi l x2). (0,0) is degenerate and rejected.
double spectral_residual(const OperatorMatrix& op, int k, int l);

/// Binary round-trip: 32-byte little-endian header (magic "FLAP", version u32,
/// n u32, boundary u8, alpha f64, m_max u32, zero padding) followed by the
/// row-major 64-bit entries.
void dump_matrix(const OperatorMatrix& op, const std::filesystem::path& file);
OperatorMatrix load_matrix(const std::filesystem::path& file);

/// Assemble with caching: one in-process entry per (n, boundary, alpha, m_max)
/// key, alive as long as callers hold the pointer, plus an optional on-disk
/// cache under the FRACLAP_CACHE_DIR environment variable.
std::shared_ptr<const OperatorMatrix> assemble_cached(
    GridSpec grid, BoundaryKind boundary, double alpha, int m_max,
    std::size_t memory_cap = kDefaultMemoryCap);

}  // namespace fraclap
