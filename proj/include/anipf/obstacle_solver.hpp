#pragma once

#include "anipf/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace anipf {

enum class ObstacleMethod {
    /// Plain projected Gauss-Seidel sweeps.
    projected_gauss_seidel,
    /// A few projected Gauss-Seidel sweeps to seed an active set, then
    /// primal-dual active-set updates with sparse Cholesky subsolves. Falls
    /// back to plain sweeps if the active set cycles.
    hybrid,
};

struct SolverOptions {
    double tol = 1e-9;                 ///< absolute KKT residual
    int max_iter = 10000;              ///< Gauss-Seidel sweeps
    int max_active_set_updates = 100;
    ObstacleMethod method = ObstacleMethod::hybrid;
};

/// Result of a box-constrained solve. `multiplier` is rhs - A x: zero where
/// |x_j| < 1, >= 0 where x_j = 1 and <= 0 where x_j = -1.
struct ViSolution {
    NodalField solution;
    NodalField multiplier;
    int iterations = 0;  ///< sweeps plus active-set updates
    double residual = 0.0;
    bool converged = false;
};

/**
 * Finds x in [-1, 1]^n with (A x - rhs) . (chi - x) >= 0 for all chi in
 * [-1, 1]^n, i.e. the minimizer of x.Ax/2 - rhs.x over the box. A must be
 * symmetric positive definite. The returned solution is always feasible;
 * on non-convergence `converged` is false and the last iterate is returned.
 *
 * Throws std::invalid_argument if some A_jj <= 0 or sizes disagree.
 */
ViSolution solve_obstacle(const SparseSpdMatrix& a, const NodalField& rhs, const NodalField& x0,
                          const SolverOptions& options = {});

/// max_j A_jj |x_j - P(x_j + mu_j / A_jj)|, P the projection onto [-1, 1]
/// and mu = rhs - A x. Zero exactly at the solution of the obstacle problem.
double obstacle_residual(const SparseSpdMatrix& a, const NodalField& rhs, const NodalField& x);

// ---------------------------------------------------------------------------
// Coupled Cahn-Hilliard step

struct ChParameters {
    double theta = 1.0;
    double tau = 0.0;
    double eps = 0.0;
    double alpha = 1.0;
    double c_psi = kCPsi;
    /// Use eps^{-1} U^n instead of eps^{-1} U^{n-1} in the inequality. Only
    /// uniquely solvable for small tau; used by stability sweeps.
    bool implicit = false;
};

struct NeumannBc {};

struct DirichletBc {
    double w_boundary = 0.0;
    std::vector<std::uint8_t> boundary_mask;
};

using ChBoundary = std::variant<NeumannBc, DirichletBc>;

struct CoupledSolution {
    NodalField u;
    NodalField w;
    /// D (c_psi/(2 alpha) W + eps^{-1} U^{n-1}) - eps K_B U, the obstacle
    /// reaction; sign convention as in ViSolution.
    NodalField multiplier;
    int iterations = 0;  ///< active-set updates
    double residual = 0.0;
    bool converged = false;
};

/**
 * Solves one step of the lumped semi-implicit Cahn-Hilliard scheme for
 * (U, W) with U in [-1, 1]^n:
 *
 *   theta D (U - U_old) / tau + K_b W = 0                 (rows of free W)
 *   eps K_B U . (chi - U) >= (c_psi/(2 alpha) W + eps^{-1} U_old, chi - U)^h
 *
 * where D = diag(mass). With DirichletBc, W is fixed to w_boundary on masked
 * vertices and the first equation is only tested at the others.
 *
 * Primal-dual active-set iteration: the active set fixes U_j = +-1, the
 * remaining linear saddle-point system is solved by sparse LU, and the set is
 * updated from the sign of the multiplier and the bound violations.
 *
 * `u_start` (optional) seeds the initial active set; U_old is used otherwise.
 * Throws std::invalid_argument on size mismatch or, for NeumannBc, when
 * |(U_old, 1)^h| >= (1, 1)^h (no admissible U with that mass has an
 * inactive vertex).
 */
CoupledSolution solve_coupled_ch(const NodalField& mass, const SparseSpdMatrix& k_mobility,
                                 const SparseSpdMatrix& k_aniso, const NodalField& u_old,
                                 const ChParameters& params, const ChBoundary& bc,
                                 const SolverOptions& options = {},
                                 const NodalField* u_start = nullptr);

/// KKT residual of a candidate (U, W) for the system solved above.
double coupled_residual(const NodalField& mass, const SparseSpdMatrix& k_mobility,
                        const SparseSpdMatrix& k_aniso, const NodalField& u_old,
                        const ChParameters& params, const ChBoundary& bc, const NodalField& u,
                        const NodalField& w);

}  // namespace anipf
