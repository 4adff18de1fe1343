#pragma once

#include "anipf/types.hpp"

#include <cstdint>
#include <vector>

namespace anipf {

/**
 * Anisotropy density of the form
 *
 *   gamma(p) = sum_l gamma_l(p),   gamma_l(p) = sqrt(p . G_l p),
 *
 * with symmetric positive definite G_l. Besides gamma and its gradient the
 * class provides A(p) = gamma(p)^2 / 2, A'(p) = gamma(p) gamma'(p) and the
 * matrix B(q) that linearizes A' around q:
 *
 *   B(q) = gamma(q) sum_l gamma_l(q)^{-1} G_l   (q != 0)
 *   B(0) = L sum_l G_l
 *
 * B(q) is SPD for every q and B(p) p = A'(p). Using B(grad U^{n-1}) grad U^n
 * in place of A'(grad U^n) keeps the discrete energy nonincreasing for any
 * time step.
 *
 * Instances are immutable.
 */
class AnisotropyDensity {
public:
    /// Throws std::invalid_argument if dim is not 2 or 3, the list is empty,
    /// or some G_l is not symmetric positive definite.
    AnisotropyDensity(int dim, std::vector<Mat> matrices);

    static AnisotropyDensity isotropic(int dim);

    int dim() const { return dim_; }
    std::size_t size() const { return matrices_.size(); }
    const std::vector<Mat>& matrices() const { return matrices_; }

    /// sqrt(p . G_l p)
    double gamma_component(std::size_t l, const Vec& p) const;

    double gamma(const Vec& p) const;

    /// sum_l gamma_l(p)^{-1} G_l p. Throws std::domain_error for p == 0.
    Vec gamma_grad(const Vec& p) const;

    double a_value(const Vec& p) const;

    /// gamma(p) gamma'(p). Throws std::domain_error for p == 0.
    Vec a_grad(const Vec& p) const;

    Mat b_matrix(const Vec& q) const;

    /// Matrices R G_l R^T, i.e. gamma_new(p) = gamma_old(R^T p).
    /// Throws std::invalid_argument if R is not orthogonal to 1e-12.
    AnisotropyDensity rotated(const Mat& rotation) const;

private:
    int dim_;
    std::vector<Mat> matrices_;
};

/// Regularized l1 norm: G_j = delta^2 I + (1 - delta^2) e_j e_j^T, j = 1..d.
/// Throws std::invalid_argument for delta <= 0.
AnisotropyDensity make_regularized_l1(int dim, double delta);

/// Counter-clockwise rotation in the x1-x2 plane.
Mat rotation_2d(double angle_rad);

/// Rotation about coordinate axis `axis` (0, 1 or 2).
Mat rotation_3d(int axis, double angle_rad);

/// Quasi-uniform unit directions: equispaced angles for d = 2, a Fibonacci
/// lattice on the sphere for d = 3.
std::vector<Vec> unit_directions(int dim, int count);

/// gamma'(n) at `n_dirs` unit directions n; for smooth strictly convex gamma
/// these points lie on the boundary of the Wulff shape.
std::vector<Vec> wulff_boundary_sample(const AnisotropyDensity& aniso, int n_dirs);

/// Worst violation (lhs - rhs) / (1 + |p|^2 + |q|^2) of each inequality over
/// a batch of random (p, q) pairs. A value <= 1e-10 means the inequality held
/// to tolerance on every pair.
struct InequalityReport {
    std::size_t samples = 0;
    double dual_estimate = 0.0;        // gamma'(p).q - gamma(q)
    double monotonicity = 0.0;         // gamma(p)[gamma(p)-gamma(q)] - A'(p).(p-q)
    double cauchy_schwarz = 0.0;       // A(p) - gamma(q)/2 sum gamma_l(q)^-1 gamma_l(p)^2
    double linearized_monotonicity = 0.0;  // gamma(p)[gamma(p)-gamma(q)] - [B(q)p].(p-q)
    double stability = 0.0;            // A(p) - A(q) - [B(q)p].(p-q)
    std::size_t failures = 0;          // pairs exceeding the tolerance
};

/// Draws `samples` seeded (p, q) pairs (a share with q = 0 and with q
/// collinear to p) and evaluates the convexity / monotonicity inequalities.
InequalityReport check_inequalities(const AnisotropyDensity& aniso, std::size_t samples,
                                    std::uint64_t seed);

}  // namespace anipf
