#include "fraclap/run_config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>

#include "fraclap/errors.hpp"

namespace fraclap {

using nlohmann::json;

std::vector<double> SweepSpec::values() const {
    if (!enabled()) return {};
    if (!(step > 0.0) || stop < start) {
        throw UsageError("sweep: need step > 0 and stop >= start");
    }
    std::vector<double> out;
    // Half-step guard keeps the endpoint included despite rounding.
    for (double v = start; v <= stop + 0.5 * step; v += step) {
        out.push_back(std::min(v, stop));
    }
    return out;
}

TargetSet RunConfig::target_set() const {
    TargetSet ts;
    ts.eps = eps;
    ts.targets = targets;
    ts.boundary = boundary;
    ts.separation_factor = separation_factor;
    return ts;
}

CutoffSpec RunConfig::cutoff_for(Point2 source) const {
    CutoffSpec c = default_cutoff(source);
    if (r1.has_value()) c.r1 = *r1;
    if (r0.has_value()) c.r0 = *r0;
    if (r1.has_value() && !r0.has_value()) c.r0 = 0.5 * c.r1;
    return c;
}

namespace {

json point_to_json(Point2 p) { return json::array({p.x1, p.x2}); }

Point2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw UsageError("config: points must be [x1, x2] arrays");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
    json j;
    j["boundary"] = to_string(c.boundary);
    j["alpha"] = c.alpha;
    j["n"] = c.n;
    j["m_max"] = c.m_max;
    if (c.r0.has_value()) j["r0"] = *c.r0;
    if (c.r1.has_value()) j["r1"] = *c.r1;
    if (c.x0.has_value()) j["x0"] = point_to_json(*c.x0);
    j["targets"] = json::array();
    for (const Target& t : c.targets) {
        json tj;
        tj["center"] = point_to_json(t.center);
        tj["kappa"] = t.kappa;
        tj["role"] = t.role == TargetRole::Desired ? "desired" : "obstacle";
        j["targets"].push_back(tj);
    }
    j["eps"] = c.eps;
    j["separation_factor"] = c.separation_factor;
    if (c.sweep.enabled()) {
        j["sweep"] = {{"param", c.sweep.param},
                      {"start", c.sweep.start},
                      {"stop", c.sweep.stop},
                      {"step", c.sweep.step},
                      {"target_index", c.sweep.target_index}};
    }
    j["out_dir"] = c.out_dir;
    j["oracle"] = c.oracle;
    j["oracle_n"] = c.oracle_n;
    j["richardson_coarse_n"] = c.richardson_coarse_n;
    j["jobs"] = c.jobs;
    j["quadrature"] = {{"radial", c.quadrature.radial},
                       {"angular_tol", c.quadrature.angular_tol},
                       {"far_radius", c.quadrature.far_radius},
                       {"tail_m", c.quadrature.tail_m}};
    return j.dump(2);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c;
    if (j.contains("boundary")) {
        std::string b = j["boundary"].get<std::string>();
        if (b == "periodic") {
            c.boundary = BoundaryKind::Periodic;
        } else if (b == "neumann") {
            c.boundary = BoundaryKind::Neumann;
        } else {
            throw UsageError("config: boundary must be 'periodic' or 'neumann'");
        }
    }
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("m_max")) c.m_max = j["m_max"].get<int>();
    if (j.contains("r0")) c.r0 = j["r0"].get<double>();
    if (j.contains("r1")) c.r1 = j["r1"].get<double>();
    if (j.contains("x0")) c.x0 = point_from_json(j["x0"]);
    if (j.contains("targets")) {
        for (const json& tj : j["targets"]) {
            Target t;
            t.center = point_from_json(tj.at("center"));
            if (tj.contains("kappa")) t.kappa = tj["kappa"].get<double>();
            if (tj.contains("role")) {
                std::string r = tj["role"].get<std::string>();
                if (r == "desired") {
                    t.role = TargetRole::Desired;
                } else if (r == "obstacle") {
                    t.role = TargetRole::Obstacle;
                } else {
                    throw UsageError("config: role must be 'desired' or 'obstacle'");
                }
            }
            c.targets.push_back(t);
        }
    }
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("separation_factor")) {
        c.separation_factor = j["separation_factor"].get<double>();
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        c.sweep.param = s.at("param").get<std::string>();
        c.sweep.start = s.at("start").get<double>();
        c.sweep.stop = s.at("stop").get<double>();
        c.sweep.step = s.at("step").get<double>();
        if (s.contains("target_index")) c.sweep.target_index = s["target_index"].get<int>();
    }
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("oracle")) c.oracle = j["oracle"].get<bool>();
    if (j.contains("oracle_n")) c.oracle_n = j["oracle_n"].get<int>();
    if (j.contains("richardson_coarse_n")) {
        c.richardson_coarse_n = j["richardson_coarse_n"].get<int>();
    }
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (j.contains("quadrature")) {
        const json& q = j["quadrature"];
        if (q.contains("radial")) c.quadrature.radial = q["radial"].get<int>();
        if (q.contains("angular_tol")) {
            c.quadrature.angular_tol = q["angular_tol"].get<double>();
        }
        if (q.contains("far_radius")) c.quadrature.far_radius = q["far_radius"].get<double>();
        if (q.contains("tail_m")) c.quadrature.tail_m = q["tail_m"].get<int>();
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("config: cannot open " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string config_hash(const RunConfig& config) {
    std::string canon = serialize_config(config);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fraclap
