#include "fraclap/operator.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "fraclap/constants.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/lattice.hpp"

namespace fraclap {

namespace {

constexpr double kPi = std::numbers::pi;

// The kernel value between two nodes depends on the per-coordinate index
// difference d = j - i (translations / even reflections) and index sum
// v = i + j + 1 (odd reflections), which lets the whole n^2 x n^2 assembly run
// off tables of size O(n^2) instead of evaluating the image sum per entry.
struct KernelTables {
    int n = 0;
    int m_max = 0;
    bool periodic = true;
    // periodic: full lattice sum indexed by (|d1|, |d2|)
    Eigen::MatrixXd per;
    // Neumann: even/even, even/odd and odd/odd parity partial sums.
    // Even axes are indexed by |d| in [0, n-1]; odd axes by v in [1, 2n-1]
    // (stored at v - 1).
    Eigen::MatrixXd ee, eo, oo;
};

KernelTables build_tables(int n, BoundaryKind boundary, double alpha, int m_max) {
    KernelTables t;
    t.n = n;
    t.m_max = m_max;
    t.periodic = boundary == BoundaryKind::Periodic;
    const double h = 1.0 / n;
    const double p = -(1.0 + alpha);

    if (t.periodic) {
        t.per.setZero(n, n);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int m1 = -m_max; m1 <= m_max; ++m1) {
                    double e1 = m1 + a * h;
                    for (int m2 = -m_max; m2 <= m_max; ++m2) {
                        double e2 = m2 + b * h;
                        double r2 = e1 * e1 + e2 * e2;
                        if (r2 < kCoincidentTol * kCoincidentTol) continue;
                        s += std::pow(r2, p);
                    }
                }
                t.per(a, b) = s;
            }
        }
        return t;
    }

    std::vector<int> even, odd;
    for (int m = -m_max; m <= m_max; ++m) {
        (m % 2 == 0 ? even : odd).push_back(m);
    }
    auto even_off = [&](int m, int a) { return m + a * h; };
    auto odd_off = [&](int m, int v) { return (m + 1) - v * h; };

    t.ee.setZero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int m1 : even) {
                double e1 = even_off(m1, a);
                for (int m2 : even) {
                    double e2 = even_off(m2, b);
                    double r2 = e1 * e1 + e2 * e2;
                    if (r2 < kCoincidentTol * kCoincidentTol) continue;
                    s += std::pow(r2, p);
                }
            }
            t.ee(a, b) = s;
        }
    }
    t.eo.setZero(n, 2 * n - 1);
    for (int a = 0; a < n; ++a) {
        for (int v = 1; v <= 2 * n - 1; ++v) {
            double s = 0.0;
            for (int m1 : even) {
                double e1 = even_off(m1, a);
                for (int m2 : odd) {
                    double e2 = odd_off(m2, v);
                    s += std::pow(e1 * e1 + e2 * e2, p);
                }
            }
            t.eo(a, v - 1) = s;
        }
    }
    t.oo.setZero(2 * n - 1, 2 * n - 1);
    for (int v1 = 1; v1 <= 2 * n - 1; ++v1) {
        for (int v2 = v1; v2 <= 2 * n - 1; ++v2) {
            double s = 0.0;
            for (int m1 : odd) {
                double e1 = odd_off(m1, v1);
                for (int m2 : odd) {
                    double e2 = odd_off(m2, v2);
                    s += std::pow(e1 * e1 + e2 * e2, p);
                }
            }
            t.oo(v1 - 1, v2 - 1) = s;
            t.oo(v2 - 1, v1 - 1) = s;
        }
    }
    return t;
}

inline double kernel_from_tables(const KernelTables& t, int i1, int i2, int j1, int j2) {
    int a1 = std::abs(j1 - i1);
    int a2 = std::abs(j2 - i2);
    if (t.periodic) {
        return t.per(a1, a2);
    }
    int v1 = i1 + j1;  // == (i1 + j1 + 1) - 1, the storage offset
    int v2 = i2 + j2;
    return t.ee(a1, a2) + t.eo(a1, v2) + t.eo(a2, v1) + t.oo(v1, v2);
}

}  // namespace

OperatorMatrix assemble(GridSpec grid, BoundaryKind boundary, double alpha, int m_max,
                        std::size_t memory_cap) {
    if (grid.n < 2) {
        throw UsageError("assemble: grid needs n >= 2");
    }
    if (m_max < 0) {
        throw UsageError("assemble: m_max must be nonnegative");
    }
    const std::size_t N = static_cast<std::size_t>(grid.size());
    const std::size_t bytes = N * N * sizeof(double);
    if (bytes > memory_cap) {
        std::ostringstream msg;
        msg << "assemble: n = " << grid.n << " needs " << bytes
            << " bytes for the dense matrix, above the cap of " << memory_cap;
        throw ResourceError(msg.str());
    }

    AlphaParams params = make_alpha_params(alpha);
    KernelTables tables = build_tables(grid.n, boundary, alpha, m_max);

    OperatorMatrix op;
    op.grid = grid;
    op.boundary = boundary;
    op.alpha = alpha;
    op.m_max = m_max;
    op.entries.setZero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));

    const double scale = params.C_alpha * grid.h() * grid.h();
    const int n = grid.n;
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
            const int p = grid.index(i1, i2);
            for (int j1 = i1; j1 < n; ++j1) {
                const int j2_start = (j1 == i1) ? i2 + 1 : 0;
                for (int j2 = j2_start; j2 < n; ++j2) {
                    const int q = grid.index(j1, j2);
                    double val = scale * kernel_from_tables(tables, i1, i2, j1, j2);
                    op.entries(p, q) = val;
                    op.entries(q, p) = val;
                }
            }
        }
    }
    // Row sums equal column sums by symmetry; column sums are contiguous.
    Eigen::VectorXd colsum = op.entries.colwise().sum();
    for (std::size_t p = 0; p < N; ++p) {
        op.entries(p, p) = -colsum(static_cast<Eigen::Index>(p));
    }
    return op;
}

Eigen::VectorXd apply(const OperatorMatrix& op, const Eigen::VectorXd& field) {
    if (field.size() != op.entries.rows()) {
        throw UsageError("apply: field length does not match the grid");
    }
    return op.entries * field;
}

double spectral_residual(const OperatorMatrix& op, int k, int l) {
    if (k == 0 && l == 0) {
        throw UsageError("spectral_residual: (0,0) mode is degenerate");
    }
    const int n = op.grid.n;
    Eigen::VectorXd phi(op.grid.size());
    double lambda_abs;
    if (op.boundary == BoundaryKind::Neumann) {
        lambda_abs = (static_cast<double>(k) * k + static_cast<double>(l) * l) * kPi * kPi;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Point2 x = op.grid.node(i, j);
                phi(op.grid.index(i, j)) = std::cos(k * kPi * x.x1) * std::cos(l * kPi * x.x2);
            }
        }
    } else {
        lambda_abs =
            4.0 * kPi * kPi * (static_cast<double>(k) * k + static_cast<double>(l) * l);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Point2 x = op.grid.node(i, j);
                phi(op.grid.index(i, j)) =
                    std::cos(2.0 * kPi * k * x.x1) * std::cos(2.0 * kPi * l * x.x2);
            }
        }
    }
    const double mu = std::pow(lambda_abs, op.alpha);
    Eigen::VectorXd r = op.entries * phi + mu * phi;
    return r.norm() / (mu * phi.norm());
}

void dump_matrix(const OperatorMatrix& op, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw ResourceError("dump_matrix: cannot open " + file.string());
    }
    unsigned char header[32] = {};
    std::memcpy(header, "FLAP", 4);
    auto put_u32 = [&](std::size_t off, std::uint32_t v) {
        for (int b = 0; b < 4; ++b) header[off + b] = (v >> (8 * b)) & 0xFF;
    };
    put_u32(4, 1u);
    put_u32(8, static_cast<std::uint32_t>(op.grid.n));
    header[12] = static_cast<unsigned char>(op.boundary);
    std::uint64_t abits;
    std::memcpy(&abits, &op.alpha, 8);
    for (int b = 0; b < 8; ++b) header[13 + b] = (abits >> (8 * b)) & 0xFF;
    put_u32(21, static_cast<std::uint32_t>(op.m_max));
    out.write(reinterpret_cast<const char*>(header), 32);
    out.write(reinterpret_cast<const char*>(op.entries.data()),
              static_cast<std::streamsize>(sizeof(double)) * op.entries.size());
    if (!out) {
        throw ResourceError("dump_matrix: short write to " + file.string());
    }
}

OperatorMatrix load_matrix(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ResourceError("load_matrix: cannot open " + file.string());
    }
    unsigned char header[32];
    in.read(reinterpret_cast<char*>(header), 32);
    if (!in || std::memcmp(header, "FLAP", 4) != 0) {
        throw UsageError("load_matrix: bad magic in " + file.string());
    }
    auto get_u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int b = 3; b >= 0; --b) v = (v << 8) | header[off + b];
        return v;
    };
    if (get_u32(4) != 1u) {
        throw UsageError("load_matrix: unsupported version");
    }
    OperatorMatrix op;
    op.grid.n = static_cast<int>(get_u32(8));
    op.boundary = static_cast<BoundaryKind>(header[12]);
    std::uint64_t abits = 0;
    for (int b = 7; b >= 0; --b) abits = (abits << 8) | header[13 + b];
    std::memcpy(&op.alpha, &abits, 8);
    op.m_max = static_cast<int>(get_u32(21));
    const auto N = static_cast<Eigen::Index>(op.grid.size());
    op.entries.resize(N, N);
    in.read(reinterpret_cast<char*>(op.entries.data()),
            static_cast<std::streamsize>(sizeof(double)) * N * N);
    if (!in) {
        throw UsageError("load_matrix: truncated file " + file.string());
    }
    return op;
}

namespace {

struct CacheKey {
    int n;
    BoundaryKind boundary;
    std::uint64_t alpha_bits;
    int m_max;
    auto operator<=>(const CacheKey&) const = default;
};

std::filesystem::path disk_cache_path(const CacheKey& key) {
    const char* dir = std::getenv("FRACLAP_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') return {};
    std::ostringstream name;
    name << "fraclap_op_" << to_string(static_cast<BoundaryKind>(key.boundary)) << "_n"
         << key.n << "_a" << std::hex << key.alpha_bits << std::dec << "_m" << key.m_max
         << ".bin";
    return std::filesystem::path(dir) / name.str();
}

}  // namespace

std::shared_ptr<const OperatorMatrix> assemble_cached(GridSpec grid, BoundaryKind boundary,
                                                      double alpha, int m_max,
                                                      std::size_t memory_cap) {
    static std::map<CacheKey, std::weak_ptr<const OperatorMatrix>> cache;
    static std::mutex mtx;

    CacheKey key{grid.n, boundary, 0, m_max};
    std::memcpy(&key.alpha_bits, &alpha, 8);

    {
        std::lock_guard<std::mutex> lock(mtx);
        if (auto it = cache.find(key); it != cache.end()) {
            if (auto live = it->second.lock()) return live;
        }
    }

    std::shared_ptr<const OperatorMatrix> op;
    std::filesystem::path disk = disk_cache_path(key);
    if (!disk.empty() && std::filesystem::exists(disk)) {
        op = std::make_shared<const OperatorMatrix>(load_matrix(disk));
    } else {
        op = std::make_shared<const OperatorMatrix>(
            assemble(grid, boundary, alpha, m_max, memory_cap));
        if (!disk.empty()) {
            std::filesystem::create_directories(disk.parent_path());
            dump_matrix(*op, disk);
        }
    }

    std::lock_guard<std::mutex> lock(mtx);
    cache[key] = op;
    return op;
}

}  // namespace fraclap
