// Command-line front end: Green's function solves, matched-asymptotics
// narrow-capture and splitting predictions, the direct finite-difference
// oracle, and the self-check suite.
#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "fraclap/capture.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/fdsolve.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/lattice.hpp"
#include "fraclap/operator.hpp"
#include "fraclap/run_config.hpp"
#include "fraclap/splitting.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fraclap;

namespace {

Point2 parse_point(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw UsageError("expected point as x1,x2: " + s);
    }
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw UsageError("expected point as x1,x2: " + s);
    }
}

Target parse_target(const std::string& s, TargetRole role) {
    Target t;
    t.role = role;
    auto c1 = s.find(',');
    if (c1 == std::string::npos) {
        throw UsageError("expected target as x1,x2[,kappa]: " + s);
    }
    auto c2 = s.find(',', c1 + 1);
    try {
        t.center.x1 = std::stod(s.substr(0, c1));
        if (c2 == std::string::npos) {
            t.center.x2 = std::stod(s.substr(c1 + 1));
        } else {
            t.center.x2 = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
            t.kappa = std::stod(s.substr(c2 + 1));
        }
    } catch (const std::exception&) {
        throw UsageError("expected target as x1,x2[,kappa]: " + s);
    }
    return t;
}

SweepSpec parse_sweep(const std::string& s, const std::string& param) {
    SweepSpec sw;
    sw.param = param;
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto colon = s.find(':', pos);
        std::string tok =
            s.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
        try {
            parts.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw UsageError("expected sweep as start:stop:step[:index]: " + s);
        }
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() < 3 || parts.size() > 4) {
        throw UsageError("expected sweep as start:stop:step[:index]: " + s);
    }
    sw.start = parts[0];
    sw.stop = parts[1];
    sw.step = parts[2];
    if (parts.size() == 4) sw.target_index = static_cast<int>(parts[3]);
    return sw;
}

void write_metadata(const RunConfig& config, const std::string& command) {
    fs::create_directories(config.out_dir);
    json j = json::parse(serialize_config(config));
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    std::ofstream out(fs::path(config.out_dir) / "run_metadata.json");
    out << j.dump(2) << "\n";
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw ResourceError("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

// Run indexed jobs on a small worker pool; results land in submission order,
// so output files are byte-identical regardless of the worker count.
void run_pool(int jobs, int count, const std::function<void(int)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(jobs, count); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mtx);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

InteractionMatrix interaction_for(const TargetSet& ts, const RunConfig& config,
                                  const OperatorMatrix& op, const AlphaParams& params) {
    GreensSet gs = solve_greens_set(ts, op, config.quadrature);
    if (config.richardson_coarse_n > 0) {
        auto op_c = assemble_cached({config.richardson_coarse_n}, op.boundary, op.alpha,
                                    op.m_max);
        GreensSet gc = solve_greens_set(ts, *op_c, config.quadrature);
        return build_interaction_richardson(ts, gc, gs, params);
    }
    return build_interaction(ts, gs, params);
}

int cmd_green(const RunConfig& config) {
    if (!config.x0.has_value()) {
        throw UsageError("green: --x0 is required");
    }
    write_metadata(config, "green");
    auto op = assemble_cached({config.n}, config.boundary, config.alpha, config.m_max);
    CutoffSpec cutoff = config.cutoff_for(*config.x0);
    GreensField field = solve_r_tilde(*op, *config.x0, cutoff, config.quadrature);
    RegularPart rp = regular_part(field);

    std::ofstream csv(fs::path(config.out_dir) / "greens_field.csv");
    write_field_csv(field, csv, config_hash(config));

    json summary = {
        {"alpha", config.alpha},
        {"boundary", to_string(config.boundary)},
        {"x0", {config.x0->x1, config.x0->x2}},
        {"r0", cutoff.r0},
        {"r1", cutoff.r1},
        {"m_max", config.m_max},
        {"n", config.n},
        {"R", rp.R},
        {"gradR", {rp.gradR[0], rp.gradR[1]}},
        {"rhs_mean", field.rhs_mean},
        {"config_hash", config_hash(config)},
    };
    write_json(fs::path(config.out_dir) / "greens_summary.json", summary);
    std::cout << "R = " << rp.R << "  gradR = (" << rp.gradR[0] << ", " << rp.gradR[1]
              << ")\n";
    return 0;
}

int cmd_gmfpt(const RunConfig& config) {
    if (config.targets.empty()) {
        throw UsageError("gmfpt: at least one --target is required");
    }
    write_metadata(config, "gmfpt");
    const std::string hash = config_hash(config);
    AlphaParams params = make_alpha_params(config.alpha);
    auto op = assemble_cached({config.n}, config.boundary, config.alpha, config.m_max);
    std::shared_ptr<const OperatorMatrix> op_fd;
    if (config.oracle) {
        op_fd = assemble_cached({config.oracle_n}, config.boundary, config.alpha,
                                config.m_max);
    }

    if (!config.sweep.enabled()) {
        TargetSet ts = config.target_set();
        InteractionMatrix im = interaction_for(ts, config, *op, params);
        GmfptResult full = gmfpt_full(ts, im, params);
        double two = gmfpt_two_term(ts, im, params);
        json summary = {
            {"config_hash", hash},
            {"ubar_asymptotic", full.ubar},
            {"ubar_two_term", two},
            {"s", std::vector<double>(full.s.data(), full.s.data() + full.s.size())},
            {"consistency_defect", full.consistency_defect},
            {"interaction_symmetry_defect", im.symmetry_defect},
        };
        if (full.regime_warning) {
            summary["warning"] = full.warning;
            std::cerr << "warning: " << full.warning << "\n";
        }
        if (config.oracle) {
            FdSolution fd = solve_mfpt(*op_fd, ts);
            summary["ubar_fd"] = fd.average;
            write_json(fs::path(config.out_dir) / "fd_summary.json",
                       json{{"config_hash", hash},
                            {"n", config.oracle_n},
                            {"alpha", config.alpha},
                            {"ubar_fd", fd.average}});
        }
        write_json(fs::path(config.out_dir) / "gmfpt_summary.json", summary);
        std::cout << "ubar = " << full.ubar << " (two-term " << two << ")\n";
        return 0;
    }

    if (config.sweep.param != "s") {
        throw UsageError("gmfpt: only an 's' sweep is supported");
    }
    std::vector<double> values = config.sweep.values();
    int idx = config.sweep.target_index;
    if (idx < 0) idx = static_cast<int>(config.targets.size()) - 1;
    if (idx >= static_cast<int>(config.targets.size())) {
        throw UsageError("gmfpt: sweep target index out of range");
    }
    struct Row {
        double s = 0.0, ubar = 0.0, two = 0.0;
        double fd = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows(values.size());
    run_pool(config.jobs, static_cast<int>(values.size()), [&](int i) {
        RunConfig local = config;
        local.targets[idx].center = {values[i], values[i]};
        TargetSet ts = local.target_set();
        InteractionMatrix im = interaction_for(ts, local, *op, params);
        rows[i].s = values[i];
        rows[i].ubar = gmfpt_full(ts, im, params).ubar;
        rows[i].two = gmfpt_two_term(ts, im, params);
        if (config.oracle) {
            rows[i].fd = solve_mfpt(*op_fd, ts).average;
        }
    });
    std::ofstream csv(fs::path(config.out_dir) / "gmfpt_sweep.csv");
    csv << "# config " << hash << "\n";
    csv << "s,ubar_asymptotic,ubar_two_term" << (config.oracle ? ",ubar_fd" : "") << "\n";
    char buf[160];
    for (const Row& r : rows) {
        if (config.oracle) {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g", r.s, r.ubar, r.two,
                          r.fd);
        } else {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g", r.s, r.ubar, r.two);
        }
        csv << buf << "\n";
    }
    std::cout << "wrote " << rows.size() << " rows to gmfpt_sweep.csv\n";
    return 0;
}

int cmd_split(const RunConfig& config, bool field_dump) {
    write_metadata(config, "split");
    const std::string hash = config_hash(config);
    TargetSet base_ts = config.target_set();
    validate_split_targets(base_ts);

    std::vector<double> alphas;
    if (config.sweep.enabled()) {
        if (config.sweep.param != "alpha") {
            throw UsageError("split: only an 'alpha' sweep is supported");
        }
        alphas = config.sweep.values();
    } else {
        alphas = {config.alpha};
    }

    struct Row {
        double alpha = 0.0, full = 0.0, two = 0.0;
        double fd = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows(alphas.size());
    std::shared_ptr<GreensSet> last_gs;
    std::shared_ptr<SplitResult> last_res;
    std::mutex last_mtx;

    run_pool(config.jobs, static_cast<int>(alphas.size()), [&](int i) {
        AlphaParams params = make_alpha_params(alphas[i]);
        auto op = assemble_cached({config.n}, config.boundary, alphas[i], config.m_max);
        GreensSet gs = solve_greens_set(base_ts, *op, config.quadrature);
        InteractionMatrix im;
        if (config.richardson_coarse_n > 0) {
            auto op_c = assemble_cached({config.richardson_coarse_n}, config.boundary,
                                        alphas[i], config.m_max);
            GreensSet gc = solve_greens_set(base_ts, *op_c, config.quadrature);
            im = build_interaction_richardson(base_ts, gc, gs, params);
        } else {
            im = build_interaction(base_ts, gs, params);
        }
        SplitResult res = split_full(base_ts, im, params);
        if (res.regime_warning) {
            std::cerr << "warning (alpha " << alphas[i] << "): " << res.warning << "\n";
        }
        rows[i].alpha = alphas[i];
        rows[i].full = res.vbar;
        rows[i].two = split_two_term(base_ts, im, params);
        if (config.oracle) {
            auto op_fd = assemble_cached({config.oracle_n}, config.boundary, alphas[i],
                                         config.m_max);
            rows[i].fd = solve_split(*op_fd, base_ts).average;
        }
        if (i == static_cast<int>(alphas.size()) - 1 && field_dump) {
            std::lock_guard<std::mutex> lock(last_mtx);
            last_gs = std::make_shared<GreensSet>(std::move(gs));
            last_res = std::make_shared<SplitResult>(std::move(res));
        }
    });

    std::ofstream csv(fs::path(config.out_dir) / "split_sweep.csv");
    csv << "# config " << hash << "\n";
    csv << "alpha,vbar_full,vbar_two_term" << (config.oracle ? ",vbar_fd" : "") << "\n";
    char buf[160];
    for (const Row& r : rows) {
        if (config.oracle) {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g", r.alpha, r.full,
                          r.two, r.fd);
        } else {
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g", r.alpha, r.full, r.two);
        }
        csv << buf << "\n";
    }

    json summary = {{"config_hash", hash}, {"rows", json::array()}};
    for (const Row& r : rows) {
        json rj = {{"alpha", r.alpha}, {"vbar_full", r.full}, {"vbar_two_term", r.two}};
        if (config.oracle) rj["vbar_fd"] = r.fd;
        summary["rows"].push_back(rj);
    }
    write_json(fs::path(config.out_dir) / "split_summary.json", summary);
    if (config.oracle) {
        write_json(fs::path(config.out_dir) / "fd_summary.json",
                   json{{"config_hash", hash},
                        {"n", config.oracle_n},
                        {"alpha", rows.back().alpha},
                        {"vbar_fd", rows.back().fd}});
    }

    if (field_dump && last_gs != nullptr) {
        AlphaParams params = make_alpha_params(rows.back().alpha);
        std::ofstream field_csv(fs::path(config.out_dir) / "split_field.csv");
        field_csv << "# config " << hash << "\n";
        field_csv << "x1,x2,v\n";
        GridSpec grid{config.n};
        for (int p = 0; p < grid.size(); ++p) {
            Point2 x = grid.node(p);
            double v = split_field(*last_res, base_ts, *last_gs, params, x);
            std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g", x.x1, x.x2, v);
            field_csv << buf << "\n";
        }
    }
    for (const Row& r : rows) {
        std::cout << "alpha " << r.alpha << ": vbar = " << r.full << " (two-term "
                  << r.two << ")";
        if (config.oracle) std::cout << "  fd " << r.fd;
        std::cout << "\n";
    }
    return 0;
}

int cmd_validate(const RunConfig& config, bool inject_asymmetry) {
    write_metadata(config, "validate");
    json checks = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, bool pass, double value,
                      double threshold) {
        checks.push_back({{"check", name},
                          {"pass", pass},
                          {"value", value},
                          {"threshold", threshold}});
        ok = ok && pass;
        std::cout << (pass ? "[ ok ] " : "[FAIL] ") << name << " (" << value << " vs "
                  << threshold << ")\n";
    };

    {
        AlphaParams p = make_alpha_params(0.5);
        double defect = std::max({std::abs(p.c_alpha - 1.0 / (2.0 * std::numbers::pi)),
                                  std::abs(p.C_alpha - 1.0 / (2.0 * std::numbers::pi)),
                                  std::abs(p.chi_alpha - std::numbers::pi / 2.0)});
        record("constants_half_alpha_identities", defect <= 1e-12, defect, 1e-12);
    }
    {
        ImageMap map{BoundaryKind::Neumann, 4};
        double k1 = image_sum_kernel(map, {0.21, 0.33}, {0.68, 0.52}, config.alpha);
        double k2 = image_sum_kernel(map, {0.68, 0.52}, {0.21, 0.33}, config.alpha);
        double defect = std::abs(k1 - k2) / std::abs(k1);
        record("kernel_symmetry", defect <= 1e-12, defect, 1e-12);
    }
    {
        Point2 x{0.3, 0.3}, y{0.8, 0.6};
        double prev = 0.0, last_delta = 0.0;
        bool monotone = true;
        bool have_prev = false;
        for (int mm : {4, 6, 8}) {
            ImageMap map{BoundaryKind::Neumann, mm};
            double k = image_sum_kernel(map, x, y, config.alpha);
            if (have_prev) {
                double delta = std::abs(k - prev);
                if (last_delta > 0.0 && delta >= last_delta) monotone = false;
                last_delta = delta;
            }
            prev = k;
            have_prev = true;
        }
        record("kernel_truncation_convergence", monotone, last_delta, 0.0);
    }
    for (BoundaryKind bk : {BoundaryKind::Periodic, BoundaryKind::Neumann}) {
        GridSpec g{config.n};
        OperatorMatrix op = assemble(g, bk, config.alpha, config.m_max);
        if (inject_asymmetry) {
            op.entries(0, 1) += 1e-6 * op.entries.cwiseAbs().maxCoeff();
        }
        double mx = op.entries.cwiseAbs().maxCoeff();
        double sym = (op.entries - op.entries.transpose()).cwiseAbs().maxCoeff() / mx;
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.size());
        double rowsum = (op.entries * ones).cwiseAbs().maxCoeff() / mx;
        std::string tag = to_string(bk);
        record("operator_symmetry_" + tag, sym <= 1e-12, sym, 1e-12);
        record("operator_rowsum_" + tag, rowsum <= 1e-10, rowsum, 1e-10);
        double res1 = spectral_residual(op, 1, 0);
        OperatorMatrix op2 = assemble({2 * config.n}, bk, config.alpha, config.m_max);
        double res2 = spectral_residual(op2, 1, 0);
        record("spectral_refinement_" + tag, res2 < res1, res2 / res1, 1.0);
    }
    {
        GridSpec g{32};
        auto op = assemble(g, BoundaryKind::Periodic, config.alpha, config.m_max);
        auto fa = solve_r_tilde(op, {0.3, 0.35});
        auto fb = solve_r_tilde(op, {0.7, 0.6});
        double gab = reconstruct_G(fa, {0.7, 0.6});
        double gba = reconstruct_G(fb, {0.3, 0.35});
        double defect = std::abs(gab - gba) / std::abs(gab);
        record("greens_reciprocity", defect <= 1e-2, defect, 1e-2);
    }

    json report = {{"config_hash", config_hash(config)}, {"ok", ok}, {"checks", checks}};
    write_json(fs::path(config.out_dir) / "validate_report.json", report);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Source-neutral Green's functions of the spectral fractional Laplacian "
                 "on the unit square, with Levy-flight narrow-capture asymptotics"};
    app.require_subcommand(1);

    std::optional<std::string> config_file;
    std::optional<std::string> boundary_str;
    std::optional<double> alpha, eps, r0, r1, separation;
    std::optional<int> n, m_max, oracle_n, jobs, quad_radial, richardson_n;
    std::optional<std::string> x0_str, out_dir, sweep_str, alpha_sweep_str, desired_str;
    std::vector<std::string> target_strs, obstacle_strs;
    bool oracle = false, field_dump = false, inject_asymmetry = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file (flags override)");
        cmd->add_option("--boundary", boundary_str, "periodic or neumann");
        cmd->add_option("--alpha", alpha, "Levy index in (0,1)");
        cmd->add_option("--n", n, "grid points per side");
        cmd->add_option("--m-max", m_max, "image truncation |m|_inf");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--jobs", jobs, "sweep worker count");
        cmd->add_option("--quad-radial", quad_radial, "radial quadrature nodes");
        cmd->add_option("--separation-factor", separation,
                        "well-separation policy multiple of eps*max(kappa)");
    };

    CLI::App* green = app.add_subcommand("green", "solve one Green's function");
    add_common(green);
    green->add_option("--x0", x0_str, "source point x1,x2");
    green->add_option("--r0", r0, "cutoff inner radius");
    green->add_option("--r1", r1, "cutoff outer radius");

    CLI::App* gmfpt = app.add_subcommand("gmfpt", "narrow-capture GMFPT");
    add_common(gmfpt);
    gmfpt->add_option("--eps", eps, "common target scale");
    gmfpt->add_option("--target", target_strs, "target center x1,x2[,kappa]");
    gmfpt->add_option("--sweep", sweep_str, "s sweep start:stop:step[:target_index]");
    gmfpt->add_flag("--oracle", oracle, "also run the finite-difference oracle");
    gmfpt->add_option("--oracle-n", oracle_n, "oracle grid points per side");
    gmfpt->add_option("--richardson", richardson_n,
                      "two-grid extrapolation with this coarse n");

    CLI::App* split = app.add_subcommand("split", "splitting probability");
    add_common(split);
    split->add_option("--eps", eps, "common target scale");
    split->add_option("--desired", desired_str, "desired target x1,x2[,kappa]");
    split->add_option("--obstacle", obstacle_strs, "obstacle target x1,x2[,kappa]");
    split->add_option("--alpha-sweep", alpha_sweep_str, "alpha sweep start:stop:step");
    split->add_flag("--oracle", oracle, "also run the finite-difference oracle");
    split->add_option("--oracle-n", oracle_n, "oracle grid points per side");
    split->add_option("--richardson", richardson_n,
                      "two-grid extrapolation with this coarse n");
    split->add_flag("--field", field_dump, "dump the pointwise splitting field");

    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    add_common(validate);
    validate->add_flag("--inject-asymmetry", inject_asymmetry,
                       "test hook: corrupt one matrix entry (negative control)");

    try {
        app.parse(argc, argv);

        RunConfig config;
        config.n = 64;
        if (validate->parsed()) config.n = 24;
        if (config_file.has_value()) config = load_config_file(*config_file);
        if (boundary_str.has_value()) {
            if (*boundary_str == "periodic") {
                config.boundary = BoundaryKind::Periodic;
            } else if (*boundary_str == "neumann") {
                config.boundary = BoundaryKind::Neumann;
            } else {
                throw UsageError("--boundary must be periodic or neumann");
            }
        }
        if (alpha.has_value()) config.alpha = *alpha;
        if (n.has_value()) config.n = *n;
        if (m_max.has_value()) config.m_max = *m_max;
        if (eps.has_value()) config.eps = *eps;
        if (r0.has_value()) config.r0 = *r0;
        if (r1.has_value()) config.r1 = *r1;
        if (x0_str.has_value()) config.x0 = parse_point(*x0_str);
        if (out_dir.has_value()) config.out_dir = *out_dir;
        if (jobs.has_value()) config.jobs = *jobs;
        if (oracle_n.has_value()) config.oracle_n = *oracle_n;
        if (richardson_n.has_value()) config.richardson_coarse_n = *richardson_n;
        if (quad_radial.has_value()) config.quadrature.radial = *quad_radial;
        if (separation.has_value()) config.separation_factor = *separation;
        if (oracle) config.oracle = true;
        if (desired_str.has_value()) {
            config.targets.insert(config.targets.begin(),
                                  parse_target(*desired_str, TargetRole::Desired));
        }
        for (const std::string& t : target_strs) {
            config.targets.push_back(parse_target(t, TargetRole::Obstacle));
        }
        for (const std::string& t : obstacle_strs) {
            config.targets.push_back(parse_target(t, TargetRole::Obstacle));
        }
        if (sweep_str.has_value()) config.sweep = parse_sweep(*sweep_str, "s");
        if (alpha_sweep_str.has_value()) {
            config.sweep = parse_sweep(*alpha_sweep_str, "alpha");
        }

        if (green->parsed()) return cmd_green(config);
        if (gmfpt->parsed()) return cmd_gmfpt(config);
        if (split->parsed()) return cmd_split(config, field_dump);
        if (validate->parsed()) return cmd_validate(config, inject_asymmetry);
        throw UsageError("no subcommand given");
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
