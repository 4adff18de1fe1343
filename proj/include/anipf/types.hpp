#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <numbers>
#include <vector>

namespace anipf {

// Small fixed-capacity vectors/matrices for d <= 3; no heap traffic in the
// per-element loops.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

/// Per-vertex values of a P1 function (U, W, multipliers, lumped masses).
using NodalField = Eigen::VectorXd;

/// Symmetric sparse operator. Stored in full (both triangles) so that a
/// column can be read as a row.
using SparseSpdMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// c_Psi = int_{-1}^{1} sqrt(2 Psi(s)) ds for the obstacle potential.
inline constexpr double kCPsi = std::numbers::pi / 2.0;

}  // namespace anipf
