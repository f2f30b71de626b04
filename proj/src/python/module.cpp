// Python bindings for the core operations: constants, image maps, operator
// assembly, Green's function solves, and the narrow-capture / splitting
// asymptotics with their finite-difference oracles.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fraclap/capture.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/fdsolve.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/lattice.hpp"
#include "fraclap/operator.hpp"
#include "fraclap/splitting.hpp"

namespace py = pybind11;
using namespace fraclap;

namespace {

BoundaryKind parse_boundary(const std::string& s) {
    if (s == "periodic") return BoundaryKind::Periodic;
    if (s == "neumann") return BoundaryKind::Neumann;
    throw UsageError("boundary must be 'periodic' or 'neumann'");
}

TargetSet make_target_set(double eps, const std::vector<std::tuple<double, double>>& centers,
                          const std::vector<double>& kappas, const std::string& boundary,
                          double separation_factor, bool first_desired) {
    TargetSet ts;
    ts.eps = eps;
    ts.boundary = parse_boundary(boundary);
    ts.separation_factor = separation_factor;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        Target t;
        t.center = {std::get<0>(centers[i]), std::get<1>(centers[i])};
        t.kappa = kappas.empty() ? 1.0 : kappas.at(i);
        t.role = (first_desired && i == 0) ? TargetRole::Desired : TargetRole::Obstacle;
        ts.targets.push_back(t);
    }
    return ts;
}

}  // namespace

PYBIND11_MODULE(_fraclap, m) {
    m.doc() = "Source-neutral Green's functions of the spectral fractional Laplacian "
              "on the unit square and Levy-flight narrow-capture asymptotics";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<RegimeError>(m, "RegimeError", PyExc_RuntimeError);
    py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

    py::class_<AlphaParams>(m, "AlphaParams")
        .def_readonly("alpha", &AlphaParams::alpha)
        .def_readonly("c_alpha", &AlphaParams::c_alpha)
        .def_readonly("C_alpha", &AlphaParams::C_alpha)
        .def_readonly("chi_alpha", &AlphaParams::chi_alpha);
    m.def("make_alpha_params", &make_alpha_params, py::arg("alpha"),
          py::arg("allow_extreme") = false);
    m.def("gamma_positive", &gamma_positive, py::arg("x"));

    m.def(
        "image_point",
        [](const std::string& boundary, int m1, int m2, double y1, double y2) {
            ImageMap map{parse_boundary(boundary), std::max(std::abs(m1), std::abs(m2))};
            Point2 p = image_point(map, {m1, m2}, {y1, y2});
            return std::make_pair(p.x1, p.x2);
        },
        py::arg("boundary"), py::arg("m1"), py::arg("m2"), py::arg("y1"), py::arg("y2"));
    m.def(
        "image_sum_kernel",
        [](const std::string& boundary, int m_max, double x1, double x2, double y1,
           double y2, double alpha) {
            ImageMap map{parse_boundary(boundary), m_max};
            return image_sum_kernel(map, {x1, x2}, {y1, y2}, alpha);
        },
        py::arg("boundary"), py::arg("m_max"), py::arg("x1"), py::arg("x2"),
        py::arg("y1"), py::arg("y2"), py::arg("alpha"));

    py::class_<OperatorMatrix, std::shared_ptr<OperatorMatrix>>(m, "OperatorMatrix")
        .def_property_readonly("n", [](const OperatorMatrix& op) { return op.grid.n; })
        .def_property_readonly(
            "boundary",
            [](const OperatorMatrix& op) { return std::string(to_string(op.boundary)); })
        .def_readonly("alpha", &OperatorMatrix::alpha)
        .def_readonly("m_max", &OperatorMatrix::m_max)
        .def_property_readonly("entries",
                               [](const OperatorMatrix& op) { return op.entries; })
        .def("apply", [](const OperatorMatrix& op,
                         const Eigen::VectorXd& f) { return apply(op, f); })
        .def("spectral_residual", [](const OperatorMatrix& op, int k, int l) {
            return spectral_residual(op, k, l);
        });
    m.def(
        "assemble",
        [](int n, const std::string& boundary, double alpha, int m_max) {
            return std::make_shared<OperatorMatrix>(
                assemble({n}, parse_boundary(boundary), alpha, m_max));
        },
        py::arg("n"), py::arg("boundary"), py::arg("alpha"), py::arg("m_max") = 6);

    py::class_<GreensField>(m, "GreensField")
        .def_property_readonly("n", [](const GreensField& f) { return f.grid.n; })
        .def_readonly("r_tilde", &GreensField::r_tilde)
        .def_readonly("rhs", &GreensField::rhs)
        .def_readonly("rhs_mean", &GreensField::rhs_mean)
        .def_property_readonly("x0",
                               [](const GreensField& f) {
                                   return std::make_pair(f.x0.x1, f.x0.x2);
                               })
        .def("reconstruct_G",
             [](const GreensField& f, double x1, double x2) {
                 return reconstruct_G(f, {x1, x2});
             })
        .def("regular_part", [](const GreensField& f) {
            RegularPart rp = regular_part(f);
            return std::make_tuple(rp.R, rp.gradR[0], rp.gradR[1]);
        });
    m.def(
        "solve_greens",
        [](const OperatorMatrix& op, double x1, double x2, double r0, double r1) {
            Point2 x0{x1, x2};
            CutoffSpec cutoff = default_cutoff(x0);
            if (r1 > 0.0) {
                cutoff.r1 = r1;
                cutoff.r0 = r0 > 0.0 ? r0 : 0.5 * r1;
            }
            return solve_r_tilde(op, x0, cutoff);
        },
        py::arg("op"), py::arg("x1"), py::arg("x2"), py::arg("r0") = 0.0,
        py::arg("r1") = 0.0);

    m.def(
        "gmfpt",
        [](const OperatorMatrix& op, double eps,
           const std::vector<std::tuple<double, double>>& centers,
           const std::vector<double>& kappas, double separation_factor) {
            TargetSet ts = make_target_set(eps, centers, kappas,
                                           to_string(op.boundary), separation_factor,
                                           /*first_desired=*/false);
            AlphaParams params = make_alpha_params(op.alpha);
            GreensSet gs = solve_greens_set(ts, op);
            InteractionMatrix im = build_interaction(ts, gs, params);
            GmfptResult full = gmfpt_full(ts, im, params);
            py::dict out;
            out["ubar"] = full.ubar;
            out["ubar_two_term"] = gmfpt_two_term(ts, im, params);
            out["s"] = full.s;
            out["consistency_defect"] = full.consistency_defect;
            return out;
        },
        py::arg("op"), py::arg("eps"), py::arg("centers"),
        py::arg("kappas") = std::vector<double>{}, py::arg("separation_factor") = 10.0);

    m.def(
        "splitting",
        [](const OperatorMatrix& op, double eps,
           const std::vector<std::tuple<double, double>>& centers,
           const std::vector<double>& kappas, double separation_factor) {
            TargetSet ts = make_target_set(eps, centers, kappas,
                                           to_string(op.boundary), separation_factor,
                                           /*first_desired=*/true);
            AlphaParams params = make_alpha_params(op.alpha);
            GreensSet gs = solve_greens_set(ts, op);
            InteractionMatrix im = build_interaction(ts, gs, params);
            SplitResult res = split_full(ts, im, params);
            py::dict out;
            out["vbar"] = res.vbar;
            out["vbar_two_term"] = split_two_term(ts, im, params);
            out["s"] = res.s;
            out["zero_sum_defect"] = res.zero_sum_defect;
            return out;
        },
        py::arg("op"), py::arg("eps"), py::arg("centers"),
        py::arg("kappas") = std::vector<double>{}, py::arg("separation_factor") = 10.0);

    m.def(
        "fd_mfpt",
        [](const OperatorMatrix& op, double eps,
           const std::vector<std::tuple<double, double>>& centers,
           const std::vector<double>& kappas, double separation_factor) {
            TargetSet ts = make_target_set(eps, centers, kappas,
                                           to_string(op.boundary), separation_factor,
                                           /*first_desired=*/false);
            FdSolution sol = solve_mfpt(op, ts);
            return std::make_pair(sol.average, sol.field);
        },
        py::arg("op"), py::arg("eps"), py::arg("centers"),
        py::arg("kappas") = std::vector<double>{}, py::arg("separation_factor") = 10.0);

    m.def(
        "fd_split",
        [](const OperatorMatrix& op, double eps,
           const std::vector<std::tuple<double, double>>& centers,
           const std::vector<double>& kappas, double separation_factor) {
            TargetSet ts = make_target_set(eps, centers, kappas,
                                           to_string(op.boundary), separation_factor,
                                           /*first_desired=*/true);
            FdSolution sol = solve_split(op, ts);
            return std::make_pair(sol.average, sol.field);
        },
        py::arg("op"), py::arg("eps"), py::arg("centers"),
        py::arg("kappas") = std::vector<double>{}, py::arg("separation_factor") = 10.0);

#ifdef VERSION_INFO
#define STR2(x) #x
#define STR(x) STR2(x)
    m.attr("__version__") = STR(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
