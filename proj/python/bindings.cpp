#include "anipf/anisotropy.hpp"
#include "anipf/config.hpp"
#include "anipf/diagnostics.hpp"
#include "anipf/fem.hpp"
#include "anipf/mesh.hpp"
#include "anipf/obstacle_solver.hpp"
#include "anipf/schemes.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace anipf;

namespace {

Vec to_vec(const Eigen::VectorXd& v) {
    if (v.size() < 2 || v.size() > 3) throw std::invalid_argument("expected a vector of length 2 or 3");
    return Vec(v);
}

Eigen::VectorXd from_vec(const Vec& v) { return Eigen::VectorXd(v); }

Mat to_mat(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 2 || m.rows() > 3) {
        throw std::invalid_argument("expected a 2x2 or 3x3 matrix");
    }
    return Mat(m);
}

py::dict energy_dict(const EnergyReport& e) {
    py::dict d;
    d["E_gamma_h"] = e.e_gamma_h;
    d["F_gamma_h"] = e.f_gamma_h ? py::cast(*e.f_gamma_h) : py::none();
    d["mass"] = e.mass;
    d["grad_energy"] = e.gradient_energy;
    d["pot_energy"] = e.potential_energy;
    d["stab_residual"] = e.stability_residual;
    return d;
}

Geometry make_geometry(const std::string& type, const std::vector<double>& center, double radius,
                       const std::vector<double>& half_extents, double value) {
    auto v = [](const std::vector<double>& x) {
        return to_vec(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
    };
    if (type == "ball") return Ball{v(center), radius};
    if (type == "cuboid") return Cuboid{v(center), v(half_extents)};
    if (type == "uniform") return Uniform{value};
    throw std::invalid_argument("unknown geometry type '" + type + "' (ball, cuboid, uniform)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Anisotropic Allen-Cahn and Cahn-Hilliard solvers with an obstacle potential";

    py::class_<AnisotropyDensity>(m, "AnisotropyDensity")
        .def(py::init([](int dim, const std::vector<Eigen::MatrixXd>& gs) {
                 std::vector<Mat> mats;
                 for (const auto& g : gs) mats.push_back(to_mat(g));
                 return AnisotropyDensity(dim, std::move(mats));
             }),
             py::arg("dim"), py::arg("matrices"))
        .def_static("isotropic", &AnisotropyDensity::isotropic, py::arg("dim"))
        .def_property_readonly("dim", &AnisotropyDensity::dim)
        .def("__len__", &AnisotropyDensity::size)
        .def("gamma", [](const AnisotropyDensity& a, const Eigen::VectorXd& p) { return a.gamma(to_vec(p)); })
        .def("gamma_grad",
             [](const AnisotropyDensity& a, const Eigen::VectorXd& p) { return from_vec(a.gamma_grad(to_vec(p))); })
        .def("a_value", [](const AnisotropyDensity& a, const Eigen::VectorXd& p) { return a.a_value(to_vec(p)); })
        .def("a_grad",
             [](const AnisotropyDensity& a, const Eigen::VectorXd& p) { return from_vec(a.a_grad(to_vec(p))); })
        .def("b_matrix",
             [](const AnisotropyDensity& a, const Eigen::VectorXd& q) {
                 return Eigen::MatrixXd(a.b_matrix(to_vec(q)));
             })
        .def("rotated",
             [](const AnisotropyDensity& a, const Eigen::MatrixXd& r) { return a.rotated(to_mat(r)); });

    m.def("regularized_l1", &make_regularized_l1, py::arg("dim"), py::arg("delta"));
    m.def("parse_anisotropy", &parse_anisotropy, py::arg("spec"), py::arg("dim"));
    m.def(
        "check_inequalities",
        [](const AnisotropyDensity& a, std::size_t samples, std::uint64_t seed) {
            const InequalityReport r = check_inequalities(a, samples, seed);
            py::dict d;
            d["dual_estimate"] = r.dual_estimate;
            d["monotonicity"] = r.monotonicity;
            d["cauchy_schwarz"] = r.cauchy_schwarz;
            d["linearized_monotonicity"] = r.linearized_monotonicity;
            d["stability"] = r.stability;
            d["failures"] = r.failures;
            return d;
        },
        py::arg("aniso"), py::arg("samples") = 10000, py::arg("seed") = 42);

    py::class_<SimplicialMesh>(m, "Mesh")
        .def_static("uniform", &SimplicialMesh::uniform, py::arg("dim"), py::arg("half_width"),
                    py::arg("subdivisions"))
        .def_property_readonly("dim", &SimplicialMesh::dim)
        .def_property_readonly("mesh_size", &SimplicialMesh::mesh_size)
        .def_property_readonly("num_vertices", &SimplicialMesh::num_vertices)
        .def_property_readonly("num_elements", &SimplicialMesh::num_elements)
        .def("vertices",
             [](const SimplicialMesh& mesh) {
                 Eigen::MatrixXd x(mesh.num_vertices(), mesh.dim());
                 for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
                     x.row(static_cast<Eigen::Index>(i)) = mesh.vertex(i).transpose();
                 }
                 return x;
             })
        .def("elements",
             [](const SimplicialMesh& mesh) {
                 Eigen::MatrixXi el(mesh.num_elements(), mesh.vertices_per_element());
                 for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
                     int k = 0;
                     for (int v : mesh.element(e)) el(static_cast<Eigen::Index>(e), k++) = v;
                 }
                 return el;
             })
        .def("boundary_mask", [](const SimplicialMesh& mesh) {
            std::vector<bool> out;
            for (auto b : mesh.boundary_mask()) out.push_back(b != 0);
            return out;
        });

    m.def("lumped_mass", &lumped_mass, py::arg("mesh"));
    m.def("assemble_stiffness", &assemble_stiffness, py::arg("mesh"));
    m.def("assemble_anisotropic_stiffness", &assemble_anisotropic_stiffness, py::arg("mesh"),
          py::arg("aniso"), py::arg("u_prev"));
    m.def(
        "discrete_energy",
        [](const SimplicialMesh& mesh, const AnisotropyDensity& a, double eps, const NodalField& u) {
            return energy_dict(discrete_energy(mesh, a, eps, u));
        },
        py::arg("mesh"), py::arg("aniso"), py::arg("eps"), py::arg("u"));
    m.def(
        "initial_profile",
        [](const SimplicialMesh& mesh, double eps, const std::string& type, const std::vector<double>& center,
           double radius, const std::vector<double>& half_extents, double value) {
            return initial_profile(mesh, eps, make_geometry(type, center, radius, half_extents, value));
        },
        py::arg("mesh"), py::arg("eps"), py::arg("type") = "ball",
        py::arg("center") = std::vector<double>{0.0, 0.0}, py::arg("radius") = 0.3,
        py::arg("half_extents") = std::vector<double>{}, py::arg("value") = 0.0);
    m.def(
        "zero_level_set",
        [](const SimplicialMesh& mesh, const NodalField& u, const std::optional<Eigen::VectorXd>& center) {
            std::optional<Vec> c;
            if (center) c = to_vec(*center);
            const LevelSet ls = zero_level_set(mesh, u, c);
            py::dict d;
            Eigen::MatrixXd pts(ls.points.size(), mesh.dim());
            for (std::size_t i = 0; i < ls.points.size(); ++i) {
                pts.row(static_cast<Eigen::Index>(i)) = ls.points[i].transpose();
            }
            d["points"] = pts;
            d["components"] = ls.components;
            d["min_radius"] = ls.min_radius;
            d["max_radius"] = ls.max_radius;
            d["mean_radius"] = ls.mean_radius;
            return d;
        },
        py::arg("mesh"), py::arg("u"), py::arg("center") = py::none());

    m.def(
        "wulff_shape_distance",
        [](const Eigen::MatrixXd& points, const AnisotropyDensity& a, const Eigen::VectorXd& center) {
            std::vector<Vec> pts;
            for (Eigen::Index i = 0; i < points.rows(); ++i) pts.push_back(to_vec(points.row(i).transpose()));
            return wulff_shape_distance(pts, a, to_vec(center));
        },
        py::arg("points"), py::arg("aniso"), py::arg("center"));
    m.def(
        "solve_obstacle",
        [](const SparseSpdMatrix& a, const NodalField& rhs, std::optional<NodalField> x0, double tol,
           const std::string& method) {
            SolverOptions opt;
            opt.tol = tol;
            if (method == "pgs") {
                opt.method = ObstacleMethod::projected_gauss_seidel;
            } else if (method != "hybrid") {
                throw std::invalid_argument("method must be 'hybrid' or 'pgs'");
            }
            const ViSolution s = solve_obstacle(a, rhs, x0 ? *x0 : NodalField::Zero(rhs.size()), opt);
            py::dict d;
            d["x"] = s.solution;
            d["multiplier"] = s.multiplier;
            d["iterations"] = s.iterations;
            d["residual"] = s.residual;
            d["converged"] = s.converged;
            return d;
        },
        py::arg("a"), py::arg("rhs"), py::arg("x0") = py::none(), py::arg("tol") = 1e-9,
        py::arg("method") = "hybrid",
        "Solve min 1/2 x'Ax - rhs'x subject to -1 <= x <= 1 (A sparse SPD).");

    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init<>())
        .def_property(
            "scheme", [](const SchemeConfig& c) { return std::string(to_string(c.scheme)); },
            [](SchemeConfig& c, const std::string& s) {
                const auto k = scheme_from_string(s);
                if (!k) throw std::invalid_argument("unknown scheme '" + s + "'");
                c.scheme = *k;
            })
        .def_readwrite("eps_inv", &SchemeConfig::eps_inv)
        .def_readwrite("theta", &SchemeConfig::theta)
        .def_readwrite("alpha", &SchemeConfig::alpha)
        .def_readwrite("w_bdry", &SchemeConfig::w_bdry)
        .def_readwrite("tau", &SchemeConfig::tau)
        .def_readwrite("t_end", &SchemeConfig::t_end)
        .def_readwrite("implicit", &SchemeConfig::implicit)
        .def_property(
            "mobility",
            [](const SchemeConfig& c) {
                return c.mobility.is_degenerate() ? std::string("degenerate")
                                                  : "constant:" + format_real(c.mobility.b0());
            },
            [](SchemeConfig& c, const std::string& s) {
                if (s == "degenerate") {
                    c.mobility = Mobility::degenerate();
                } else if (s.rfind("constant:", 0) == 0) {
                    c.mobility = Mobility::constant(std::stod(s.substr(9)));
                } else {
                    throw std::invalid_argument("mobility must be 'degenerate' or 'constant:<b0>'");
                }
            })
        .def_property(
            "tol", [](const SchemeConfig& c) { return c.solver.tol; },
            [](SchemeConfig& c, double t) { c.solver.tol = t; })
        .def_property_readonly("eps", &SchemeConfig::eps)
        .def("num_steps", &SchemeConfig::num_steps)
        .def("validate", &SchemeConfig::validate);

    m.def("implicit_step_bound", &implicit_step_bound, py::arg("config"));

    py::class_<SchemeState>(m, "SchemeState")
        .def_readonly("t", &SchemeState::t)
        .def_readonly("step", &SchemeState::step)
        .def_readonly("u", &SchemeState::u)
        .def_readonly("w", &SchemeState::w)
        .def_readonly("dissipation", &SchemeState::dissipation)
        .def_readonly("energy_increase", &SchemeState::energy_increase)
        .def_property_readonly("energy", [](const SchemeState& s) { return energy_dict(s.energy); })
        .def_property_readonly("converged", [](const SchemeState& s) { return s.stats.converged; })
        .def_property_readonly("iterations", [](const SchemeState& s) { return s.stats.iterations; })
        .def_property_readonly("residual", [](const SchemeState& s) { return s.stats.residual; });

    py::class_<TimeStepper>(m, "TimeStepper")
        .def(py::init<const SimplicialMesh&, AnisotropyDensity, SchemeConfig>(), py::arg("mesh"),
             py::arg("aniso"), py::arg("config"), py::keep_alive<1, 2>())
        .def("initial_state", &TimeStepper::initial_state, py::arg("u0"))
        .def("step", &TimeStepper::step, py::arg("state"), py::call_guard<py::gil_scoped_release>())
        .def("energy", [](const TimeStepper& s, const NodalField& u) { return energy_dict(s.energy(u)); });

    m.def(
        "parse_config", [](const std::string& text) { return emit_config(parse_config(text)); },
        py::arg("text"), "Parse a config and return its fully resolved text form.");
    m.def(
        "run_config",
        [](const std::string& text, int max_steps) {
            RunConfig cfg = parse_config(text);
            if (max_steps >= 0) cfg.scheme.t_end = std::min(cfg.scheme.t_end, max_steps * cfg.scheme.tau);
            const SimplicialMesh mesh = build_mesh(cfg);
            const AnisotropyDensity aniso = parse_anisotropy(cfg.anisotropy, cfg.domain.dim);
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_simulation(cfg.scheme, mesh, aniso, cfg.geometry);
            }
            py::list history;
            for (const auto& r : s.history) {
                py::dict d = energy_dict(r.energy);
                d["step"] = r.step;
                d["t"] = r.t;
                d["solver_iters"] = r.stats.iterations;
                d["solver_residual"] = r.stats.residual;
                history.append(d);
            }
            py::dict out;
            out["run_id"] = run_id(cfg);
            out["u"] = s.final_state.u;
            out["w"] = s.final_state.w;
            out["history"] = history;
            out["energy_increases"] = s.energy_increases;
            out["unconverged_steps"] = s.unconverged_steps;
            out["max_stability_residual"] = s.max_stability_residual;
            return out;
        },
        py::arg("text"), py::arg("max_steps") = -1,
        "Run a config (optionally truncated to max_steps) and return the history.");
}
