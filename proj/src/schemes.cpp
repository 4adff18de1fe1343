#include "anipf/schemes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace anipf {

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::allen_cahn: return "allen_cahn";
        case SchemeKind::cahn_hilliard_neumann: return "cahn_hilliard_neumann";
        case SchemeKind::cahn_hilliard_dirichlet: return "cahn_hilliard_dirichlet";
    }
    return "?";
}

std::optional<SchemeKind> scheme_from_string(std::string_view name) {
    for (auto k : {SchemeKind::allen_cahn, SchemeKind::cahn_hilliard_neumann,
                   SchemeKind::cahn_hilliard_dirichlet}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

int SchemeConfig::num_steps() const {
    return static_cast<int>(std::ceil(t_end / tau - 1e-9));
}

void SchemeConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("scheme config: " + msg); };
    if (!(eps_inv > 0.0)) fail("eps_inv must be positive");
    if (!(tau > 0.0)) fail("tau must be positive");
    if (!(t_end > 0.0)) fail("t_end must be positive");
    if (!(theta > 0.0)) fail("theta must be positive");
    if (!(alpha > 0.0)) fail("alpha must be positive");
    if (c_psi != kCPsi) fail("c_psi is fixed to pi/2");
    if (!(mobility_floor >= 0.0)) fail("mobility_floor must be nonnegative");
    if (snapshot_every < 0) fail("snapshot_every must be nonnegative");
    if (!(solver.tol > 0.0)) fail("solver tol must be positive");
    if (scheme == SchemeKind::cahn_hilliard_dirichlet) {
        if (mobility.is_degenerate()) fail("the Dirichlet scheme needs a constant mobility");
        if (theta != 1.0) fail("the Dirichlet scheme uses theta = 1");
    } else if (w_bdry != 0.0) {
        fail("w_bdry is only meaningful for cahn_hilliard_dirichlet");
    }
}

double implicit_step_bound(const SchemeConfig& config) {
    const double eps = config.eps();
    return 2.0 * config.c_psi * eps * eps * eps * config.theta /
           (config.alpha * config.mobility.b0());
}

// ---------------------------------------------------------------------------

double signed_distance(const Geometry& geometry, const Vec& x) {
    return std::visit(
        [&](const auto& g) -> double {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return g.radius - (x - g.center).norm();
            } else if constexpr (std::is_same_v<T, BallUnion>) {
                double d = -INFINITY;
                for (const Ball& b : g.balls) d = std::max(d, b.radius - (x - b.center).norm());
                return d;
            } else if constexpr (std::is_same_v<T, Cuboid>) {
                const Vec q = (x - g.center).cwiseAbs() - g.half_extents;
                const double outside = q.cwiseMax(0.0).norm();
                const double inside = std::min(q.maxCoeff(), 0.0);
                return -(outside + inside);
            } else {
                return INFINITY;
            }
        },
        geometry);
}

NodalField initial_profile(const SimplicialMesh& mesh, double eps, const Geometry& geometry) {
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    if (const auto* uni = std::get_if<Uniform>(&geometry)) {
        if (!(std::abs(uni->value) <= 1.0)) {
            throw std::invalid_argument("initial_profile: uniform value outside [-1, 1]");
        }
        return NodalField::Constant(n, uni->value);
    }
    const double band = 0.5 * eps * std::numbers::pi;
    NodalField u(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = signed_distance(geometry, mesh.vertex(j));
        if (d >= band) {
            u[j] = 1.0;
        } else if (d <= -band) {
            u[j] = -1.0;
        } else {
            u[j] = std::clamp(std::sin(d / eps), -1.0, 1.0);
        }
    }
    return u;
}

// ---------------------------------------------------------------------------

TimeStepper::TimeStepper(const SimplicialMesh& mesh, AnisotropyDensity aniso, SchemeConfig config)
    : mesh_(mesh), aniso_(std::move(aniso)), config_(std::move(config)) {
    config_.validate();
    if (aniso_.dim() != mesh_.dim()) {
        throw std::invalid_argument("TimeStepper: anisotropy and mesh dimensions differ");
    }
    lumped_ = lumped_mass(mesh_);
    if (config_.scheme == SchemeKind::cahn_hilliard_dirichlet) stiffness_ = assemble_stiffness(mesh_);
}

EnergyReport TimeStepper::energy(const NodalField& u) const {
    EnergyReport r = discrete_energy(mesh_, lumped_, aniso_, config_.eps(), u);
    if (config_.scheme == SchemeKind::cahn_hilliard_dirichlet) {
        r.f_gamma_h = dirichlet_energy_functional(r, config_.alpha, config_.c_psi, config_.w_bdry,
                                                  r.mass);
    }
    return r;
}

SchemeState TimeStepper::initial_state(NodalField u0) const {
    if (static_cast<std::size_t>(u0.size()) != mesh_.num_vertices()) {
        throw std::invalid_argument("initial_state: field size mismatch");
    }
    SchemeState s;
    s.u = std::move(u0);
    s.w = NodalField::Zero(s.u.size());
    if (config_.scheme == SchemeKind::cahn_hilliard_dirichlet) s.w.setConstant(config_.w_bdry);
    s.energy = energy(s.u);
    return s;
}

SchemeState TimeStepper::step(const SchemeState& prev) const {
    return config_.scheme == SchemeKind::allen_cahn ? allen_cahn(prev) : cahn_hilliard(prev);
}

void TimeStepper::finish(const SchemeState& prev, SchemeState& next, StabilityKind kind) const {
    next.t = prev.t + config_.tau;
    next.step = prev.step + 1;
    next.energy = energy(next.u);
    next.energy.stability_residual =
        stability_residual(prev.energy, next.energy, StepData{kind, next.dissipation});
    next.energy_increase = next.energy.stability_residual > 10.0 * config_.solver.tol;
}

SchemeState TimeStepper::allen_cahn(const SchemeState& prev) const {
    const SchemeConfig& c = config_;
    const double eps = c.eps();
    const double beta = c.c_psi / (2.0 * c.alpha);

    // With (3.5)-type elimination beta W_j = -(eps/tau)(U_j - U_old_j), the
    // inequality becomes an obstacle problem for U alone; alpha drops out.
    SparseSpdMatrix a = eps * assemble_anisotropic_stiffness(mesh_, aniso_, prev.u);
    NodalField diag_add = (eps / c.tau) * lumped_;
    NodalField rhs = lumped_.cwiseProduct(prev.u) * (eps / c.tau + (c.implicit ? 0.0 : c.eps_inv));
    if (c.implicit) diag_add -= c.eps_inv * lumped_;
    for (int j = 0; j < a.outerSize(); ++j) a.coeffRef(j, j) += diag_add[j];

    SchemeState next;
    StepStats stats;
    try {
        const ViSolution sol = solve_obstacle(a, rhs, prev.u, c.solver);
        next.u = sol.solution;
        stats.iterations = sol.iterations;
        stats.residual = sol.residual;
        stats.converged = sol.converged;
    } catch (const std::invalid_argument&) {
        // Only reachable for the implicit variant with a large step, where
        // the operator loses definiteness.
        next.u = prev.u;
        stats.converged = false;
        stats.residual = INFINITY;
    }
    next.w = -(eps / c.tau / beta) * (next.u - prev.u);
    next.stats = stats;
    next.dissipation = c.tau * c.eps_inv * beta * beta * lumped_inner(lumped_, next.w, next.w);
    finish(prev, next, StabilityKind::allen_cahn);
    return next;
}

SchemeState TimeStepper::cahn_hilliard(const SchemeState& prev) const {
    const SchemeConfig& c = config_;
    const bool dirichlet = c.scheme == SchemeKind::cahn_hilliard_dirichlet;

    MobilityStiffness kb;
    if (dirichlet) {
        kb.matrix = c.mobility.b0() * stiffness_;
    } else {
        const double floor = c.mobility.is_degenerate() ? c.mobility_floor : 0.0;
        kb = assemble_mobility_stiffness(mesh_, prev.u, c.mobility, floor);
    }
    const SparseSpdMatrix k_aniso = assemble_anisotropic_stiffness(mesh_, aniso_, prev.u);

    ChParameters params;
    params.theta = c.theta;
    params.tau = c.tau;
    params.eps = c.eps();
    params.alpha = c.alpha;
    params.c_psi = c.c_psi;
    params.implicit = c.implicit;

    ChBoundary bc = NeumannBc{};
    if (dirichlet) bc = DirichletBc{c.w_bdry, mesh_.boundary_mask()};

    const CoupledSolution sol =
        solve_coupled_ch(lumped_, kb.matrix, k_aniso, prev.u, params, bc, c.solver, &prev.u);

    SchemeState next;
    next.u = sol.u;
    next.w = sol.w;
    next.stats.iterations = sol.iterations;
    next.stats.residual = sol.residual;
    next.stats.converged = sol.converged;
    next.stats.regularized_vertices = kb.regularized_vertices;
    if (dirichlet) {
        next.dissipation = c.tau * c.mobility.b0() * next.w.dot(stiffness_ * next.w);
        finish(prev, next, StabilityKind::cahn_hilliard_dirichlet);
    } else {
        next.dissipation =
            c.tau * c.c_psi / (2.0 * c.theta * c.alpha) * next.w.dot(kb.matrix * next.w);
        finish(prev, next, StabilityKind::cahn_hilliard);
    }
    return next;
}

namespace {

SchemeState step_with(SchemeKind kind, const SchemeState& state, SchemeConfig config,
                      const SimplicialMesh& mesh, const AnisotropyDensity& aniso) {
    config.scheme = kind;
    const TimeStepper stepper(mesh, aniso, config);
    SchemeState prev = state;
    prev.energy = stepper.energy(prev.u);
    return stepper.step(prev);
}

}  // namespace

SchemeState allen_cahn_step(const SchemeState& state, const SchemeConfig& config,
                            const SimplicialMesh& mesh, const AnisotropyDensity& aniso) {
    return step_with(SchemeKind::allen_cahn, state, config, mesh, aniso);
}

SchemeState cahn_hilliard_step(const SchemeState& state, const SchemeConfig& config,
                               const SimplicialMesh& mesh, const AnisotropyDensity& aniso) {
    return step_with(SchemeKind::cahn_hilliard_neumann, state, config, mesh, aniso);
}

SchemeState cahn_hilliard_dirichlet_step(const SchemeState& state, const SchemeConfig& config,
                                         const SimplicialMesh& mesh,
                                         const AnisotropyDensity& aniso) {
    return step_with(SchemeKind::cahn_hilliard_dirichlet, state, config, mesh, aniso);
}

RunSummary run_simulation(const SchemeConfig& config, const SimplicialMesh& mesh,
                          const AnisotropyDensity& aniso, const Geometry& geometry,
                          const StepObserver& observer, bool abort_on_failure) {
    const TimeStepper stepper(mesh, aniso, config);
    RunSummary summary;
    SchemeState state = stepper.initial_state(initial_profile(mesh, config.eps(), geometry));

    auto record_of = [](const SchemeState& s, double wall) {
        StepRecord r;
        r.step = s.step;
        r.t = s.t;
        r.energy = s.energy;
        r.stats = s.stats;
        r.wall_seconds = wall;
        r.mobility_regularized = s.stats.regularized_vertices > 0;
        return r;
    };

    summary.history.push_back(record_of(state, 0.0));
    if (observer) observer(state, summary.history.back());

    const int steps = config.num_steps();
    for (int n = 0; n < steps; ++n) {
        const auto t0 = std::chrono::steady_clock::now();
        SchemeState next = stepper.step(state);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!next.stats.converged) {
            ++summary.unconverged_steps;
            if (abort_on_failure) {
                std::ostringstream msg;
                msg << "solver did not converge at step " << next.step << " (t = " << next.t
                    << ", residual " << next.stats.residual << ")";
                throw SimulationError(msg.str(), state, next);
            }
        }
        if (next.energy_increase) ++summary.energy_increases;
        summary.max_stability_residual =
            std::max(summary.max_stability_residual, next.energy.stability_residual);
        summary.max_mass_drift =
            std::max(summary.max_mass_drift, std::abs(next.energy.mass - state.energy.mass));
        state = std::move(next);
        summary.history.push_back(record_of(state, wall));
        if (observer) observer(state, summary.history.back());
    }
    summary.final_state = std::move(state);
    return summary;
}

}  // namespace anipf
