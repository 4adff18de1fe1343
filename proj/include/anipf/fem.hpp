#pragma once

#include "anipf/anisotropy.hpp"
#include "anipf/mesh.hpp"
#include "anipf/types.hpp"

#include <functional>

namespace anipf {

/// M_j = int chi_j dx = sum_{sigma containing j} |sigma| / (d + 1).
/// The lumped inner product is (a, b)^h = sum_j M_j a_j b_j.
NodalField lumped_mass(const SimplicialMesh& mesh);

/// (a, b)^h
double lumped_inner(const NodalField& mass, const NodalField& a, const NodalField& b);

/// Standard P1 stiffness matrix (grad chi_j, grad chi_i).
SparseSpdMatrix assemble_stiffness(const SimplicialMesh& mesh);

/// K_ij = sum_sigma |sigma| grad chi_i . B(grad u_prev|sigma) grad chi_j.
SparseSpdMatrix assemble_anisotropic_stiffness(const SimplicialMesh& mesh,
                                               const AnisotropyDensity& aniso,
                                               const NodalField& u_prev);

/// Mobility b : [-1, 1] -> [0, inf).
class Mobility {
public:
    static Mobility constant(double b0);
    /// b(u) = 1 - u^2
    static Mobility degenerate();

    double operator()(double u) const { return degenerate_ ? 1.0 - u * u : b0_; }
    bool is_degenerate() const { return degenerate_; }
    /// The constant value; 1 for the degenerate mobility (its maximum).
    double b0() const { return b0_; }

private:
    Mobility(bool degenerate, double b0) : degenerate_(degenerate), b0_(b0) {}
    bool degenerate_;
    double b0_;
};

struct MobilityStiffness {
    SparseSpdMatrix matrix;
    /// Number of vertices whose mobility value was raised to the floor.
    std::size_t regularized_vertices = 0;
};

/// K_b,ij = sum_sigma mean_{k in sigma} b(u_prev(p_k)) |sigma| grad chi_i . grad chi_j,
/// i.e. (pi^h[b(u_prev)] grad chi_j, grad chi_i) integrated exactly.
/// Vertex values below `floor` are replaced by `floor` (pass 0 for the
/// unregularized operator). Throws std::invalid_argument if any vertex value
/// of b is negative.
MobilityStiffness assemble_mobility_stiffness(const SimplicialMesh& mesh, const NodalField& u_prev,
                                              const std::function<double(double)>& mobility,
                                              double floor = 0.0);

}  // namespace anipf
