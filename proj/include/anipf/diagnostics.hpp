#pragma once

#include "anipf/anisotropy.hpp"
#include "anipf/mesh.hpp"
#include "anipf/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace anipf {

/// Discrete energy E^h = gradient_energy + potential_energy, with
///   gradient_energy  = eps/2 |gamma(grad U)|_0^2
///   potential_energy = eps^{-1} (Psi(U), 1)^h,  Psi(u) = (1 - u^2)/2 on [-1, 1].
struct EnergyReport {
    double e_gamma_h = 0.0;
    std::optional<double> f_gamma_h;  ///< Dirichlet runs only
    double mass = 0.0;                ///< (U, 1)^h
    double gradient_energy = 0.0;
    double potential_energy = 0.0;
    double stability_residual = 0.0;
};

/// Throws std::invalid_argument if some |U_j| > 1 + 1e-12.
EnergyReport discrete_energy(const SimplicialMesh& mesh, const NodalField& lumped,
                             const AnisotropyDensity& aniso, double eps, const NodalField& u);

EnergyReport discrete_energy(const SimplicialMesh& mesh, const AnisotropyDensity& aniso, double eps,
                             const NodalField& u);

/// F^h(U) = 2 alpha / c_psi E^h(U) - w_bdry (U, 1)^h
double dirichlet_energy_functional(const EnergyReport& report, double alpha, double c_psi,
                                   double w_bdry, double mass_raw);

/// Which monitored energy a step must not increase.
enum class StabilityKind {
    allen_cahn,         ///< E^h, dissipation tau eps^{-1} (c_psi/(2 alpha))^2 |W|_h^2
    cahn_hilliard,      ///< E^h, dissipation tau c_psi / (2 theta alpha) (K_b W).W
    cahn_hilliard_dirichlet,  ///< F^h, dissipation tau b0 |grad W|_0^2
};

struct StepData {
    StabilityKind kind = StabilityKind::allen_cahn;
    /// The dissipation term already multiplied out (see StabilityKind).
    double dissipation = 0.0;
};

/// lhs - rhs of the per-step energy inequality: nonpositive up to solver
/// tolerance for a converged step.
double stability_residual(const EnergyReport& prev, const EnergyReport& curr, const StepData& step);

/// Zero level set of a P1 field: crossing points on mesh edges, joined into
/// segments per triangle (d = 2). Vertices with U == 0 count as negative.
struct LevelSet {
    std::vector<Vec> points;
    std::vector<std::array<int, 2>> segments;  ///< d = 2 only
    int components = 0;  ///< connected pieces (points joined within a simplex)
    double min_radius = 0.0;
    double max_radius = 0.0;
    double mean_radius = 0.0;
    bool empty() const { return points.empty(); }
};

/// Radii are measured from `center` (defaults to the origin).
LevelSet zero_level_set(const SimplicialMesh& mesh, const NodalField& u,
                        const std::optional<Vec>& center = std::nullopt);

/// Symmetric Hausdorff distance between `points` (relative to `center`) and
/// the Wulff boundary of `aniso`, after uniformly rescaling the points by the
/// least-squares radial scale factor. Measured in units of the Wulff shape
/// (gamma-scaled), so it is a pure shape distance. In 2D the points are
/// joined into a closed polygon by angle about `center`, so the interface
/// must be star-shaped with respect to it; in 3D they are used as a point
/// cloud. Throws
/// std::invalid_argument for fewer than 8 points or points at the center.
double wulff_shape_distance(const std::vector<Vec>& points, const AnisotropyDensity& aniso,
                            const Vec& center);

}  // namespace anipf
