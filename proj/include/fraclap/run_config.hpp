#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fraclap/capture.hpp"
#include "fraclap/geometry.hpp"
#include "fraclap/greens.hpp"

namespace fraclap {

/// Sweep over a scalar parameter: "s" moves one target center along the
/// diagonal to (s, s); "alpha" varies the Levy index.
struct SweepSpec {
    std::string param;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    int target_index = -1;  // -1: last target

    bool operator==(const SweepSpec&) const = default;
    bool enabled() const { return !param.empty(); }
    std::vector<double> values() const;
};

/// Complete, seedless description of a run. Serialization round-trips exactly
/// and the canonical JSON dump is hashed into every output file.
struct RunConfig {
    BoundaryKind boundary = BoundaryKind::Periodic;
    double alpha = 0.6;
    int n = 64;
    int m_max = 6;
    std::optional<double> r0;  // cutoff overrides; absent = default policy
    std::optional<double> r1;
    std::optional<Point2> x0;  // green subcommand source
    std::vector<Target> targets;
    double eps = 0.03;
    double separation_factor = 10.0;
    SweepSpec sweep;
    std::string out_dir = ".";
    bool oracle = false;
    int oracle_n = 96;
    int richardson_coarse_n = 0;  // 0 disables two-grid extrapolation
    int jobs = 1;
    QuadratureSpec quadrature;

    bool operator==(const RunConfig&) const = default;

    TargetSet target_set() const;
    CutoffSpec cutoff_for(Point2 source) const;
};

std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace fraclap
