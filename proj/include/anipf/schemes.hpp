#pragma once

#include "anipf/anisotropy.hpp"
#include "anipf/diagnostics.hpp"
#include "anipf/fem.hpp"
#include "anipf/mesh.hpp"
#include "anipf/obstacle_solver.hpp"
#include "anipf/types.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace anipf {

enum class SchemeKind { allen_cahn, cahn_hilliard_neumann, cahn_hilliard_dirichlet };

std::string_view to_string(SchemeKind kind);
std::optional<SchemeKind> scheme_from_string(std::string_view name);

struct SchemeConfig {
    SchemeKind scheme = SchemeKind::allen_cahn;
    double eps_inv = 16.0 * std::numbers::pi;
    double theta = 1.0;
    double alpha = 1.0;
    double c_psi = kCPsi;
    Mobility mobility = Mobility::constant(2.0);
    double w_bdry = 0.0;
    double tau = 0.0;
    double t_end = 0.0;
    int snapshot_every = 0;
    /// eps^{-1} U^n instead of eps^{-1} U^{n-1} on the right of the
    /// inequality (conditionally stable comparison variant).
    bool implicit = false;
    /// Lower bound applied to vertex mobility values of a degenerate b.
    double mobility_floor = 1e-12;
    SolverOptions solver;

    double eps() const { return 1.0 / eps_inv; }
    /// Number of uniform steps covering [0, t_end].
    int num_steps() const;
    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

/// Step size bound 2 c_psi eps^3 theta / (alpha b0) below which the
/// implicit variant is known to be uniquely solvable (isotropic, constant b0).
double implicit_step_bound(const SchemeConfig& config);

// ---------------------------------------------------------------------------
// Initial data

/// Disk (d = 2) or ball (d = 3).
struct Ball {
    Vec center;
    double radius = 0.0;
};
struct BallUnion {
    std::vector<Ball> balls;
};
struct Cuboid {
    Vec center;
    Vec half_extents;
};
struct Uniform {
    double value = 0.0;
};
using Geometry = std::variant<Ball, BallUnion, Cuboid, Uniform>;

/// Exact signed distance to the geometry boundary, positive inside.
double signed_distance(const Geometry& geometry, const Vec& x);

/// U0(p_j) = sin(dist(p_j) / eps), set to +-1 where |dist| >= eps pi / 2, so
/// the interface layer has width eps pi. Throws std::invalid_argument for
/// Uniform with |value| > 1.
NodalField initial_profile(const SimplicialMesh& mesh, double eps, const Geometry& geometry);

// ---------------------------------------------------------------------------
// Time stepping

struct StepStats {
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    std::size_t regularized_vertices = 0;  ///< degenerate mobility floor hits
};

struct SchemeState {
    double t = 0.0;
    int step = 0;
    NodalField u;
    NodalField w;
    EnergyReport energy;
    StepStats stats;
    double dissipation = 0.0;
    bool energy_increase = false;  ///< stability residual above 10 tol
};

/// Thrown by run_simulation when a step's solver does not converge.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, SchemeState last_good, SchemeState failed)
        : std::runtime_error(what), last_good(std::move(last_good)), failed(std::move(failed)) {}
    SchemeState last_good;
    SchemeState failed;
};

/// Caches the mesh-dependent operators of one run and advances states.
class TimeStepper {
public:
    /// The mesh must outlive the stepper.
    TimeStepper(const SimplicialMesh& mesh, AnisotropyDensity aniso, SchemeConfig config);

    SchemeState initial_state(NodalField u0) const;
    SchemeState step(const SchemeState& prev) const;

    /// Energy report of U, including F^h for Dirichlet runs.
    EnergyReport energy(const NodalField& u) const;

    const SchemeConfig& config() const { return config_; }
    const NodalField& lumped() const { return lumped_; }
    const SimplicialMesh& mesh() const { return mesh_; }
    const AnisotropyDensity& anisotropy() const { return aniso_; }

private:
    SchemeState allen_cahn(const SchemeState& prev) const;
    SchemeState cahn_hilliard(const SchemeState& prev) const;
    void finish(const SchemeState& prev, SchemeState& next, StabilityKind kind) const;

    const SimplicialMesh& mesh_;
    AnisotropyDensity aniso_;
    SchemeConfig config_;
    NodalField lumped_;
    SparseSpdMatrix stiffness_;
};

SchemeState allen_cahn_step(const SchemeState& state, const SchemeConfig& config,
                            const SimplicialMesh& mesh, const AnisotropyDensity& aniso);
SchemeState cahn_hilliard_step(const SchemeState& state, const SchemeConfig& config,
                               const SimplicialMesh& mesh, const AnisotropyDensity& aniso);
SchemeState cahn_hilliard_dirichlet_step(const SchemeState& state, const SchemeConfig& config,
                                         const SimplicialMesh& mesh,
                                         const AnisotropyDensity& aniso);

/// Per-step scalar record kept by run_simulation.
struct StepRecord {
    int step = 0;
    double t = 0.0;
    EnergyReport energy;
    StepStats stats;
    double wall_seconds = 0.0;
    bool mobility_regularized = false;
};

struct RunSummary {
    SchemeState final_state;
    std::vector<StepRecord> history;  ///< includes step 0
    int energy_increases = 0;
    int unconverged_steps = 0;
    double max_stability_residual = -INFINITY;
    double max_mass_drift = 0.0;  ///< max |(U^n - U^{n-1}, 1)^h|
};

/// Called with the initial state and after every step.
using StepObserver = std::function<void(const SchemeState&, const StepRecord&)>;

/// Steps from t = 0 to t_end. Throws SimulationError if a step's solver does
/// not converge and `abort_on_failure` is set; otherwise the step is counted
/// in `unconverged_steps` and the run continues.
RunSummary run_simulation(const SchemeConfig& config, const SimplicialMesh& mesh,
                          const AnisotropyDensity& aniso, const Geometry& geometry,
                          const StepObserver& observer = {}, bool abort_on_failure = true);

}  // namespace anipf
