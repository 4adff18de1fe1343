#pragma once

#include "anipf/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace anipf {

/// Conforming simplicial mesh of the box (-H, H)^d with the per-element data
/// that P1 assembly needs (volume and constant basis-function gradients).
class SimplicialMesh {
public:
    /// Kuhn (Freudenthal) triangulation of an N^d grid: every cell is split
    /// into d! simplices along its main diagonal. Throws std::invalid_argument
    /// for N < 1, H <= 0 or d not in {2, 3}.
    static SimplicialMesh uniform(int dim, double half_width, int subdivisions);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    int subdivisions() const { return subdivisions_; }
    /// h = 2H / N (grid spacing along an axis)
    double mesh_size() const { return 2.0 * half_width_ / subdivisions_; }
    /// |Omega| = (2H)^d
    double domain_volume() const;

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return element_volume_.size(); }
    int vertices_per_element() const { return dim_ + 1; }

    const Vec& vertex(std::size_t i) const { return vertices_[i]; }
    const std::vector<Vec>& vertices() const { return vertices_; }

    std::span<const int> element(std::size_t e) const {
        return {elements_.data() + e * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
    }
    const std::vector<int>& element_connectivity() const { return elements_; }

    bool on_boundary(std::size_t i) const { return boundary_mask_[i] != 0; }
    const std::vector<std::uint8_t>& boundary_mask() const { return boundary_mask_; }

    double element_volume(std::size_t e) const { return element_volume_[e]; }

    /// Gradient of the local basis function attached to the k-th vertex of e.
    const Vec& basis_gradient(std::size_t e, int k) const {
        return basis_gradients_[e * (dim_ + 1) + k];
    }

    /// Constant gradient of the P1 interpolant of `nodal_values` on element e.
    /// Throws std::out_of_range for an invalid element index.
    Vec element_gradient(std::size_t e, std::span<const double> nodal_values) const;

private:
    SimplicialMesh() = default;

    int dim_ = 0;
    double half_width_ = 0.0;
    int subdivisions_ = 0;
    std::vector<Vec> vertices_;
    std::vector<int> elements_;
    std::vector<std::uint8_t> boundary_mask_;
    std::vector<double> element_volume_;
    std::vector<Vec> basis_gradients_;
};

inline std::span<const double> as_span(const NodalField& f) {
    return {f.data(), static_cast<std::size_t>(f.size())};
}

}  // namespace anipf
