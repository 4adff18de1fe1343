#include "anipf/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace anipf {

double SimplicialMesh::domain_volume() const { return std::pow(2.0 * half_width_, dim_); }

SimplicialMesh SimplicialMesh::uniform(int dim, double half_width, int subdivisions) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("mesh: dimension must be 2 or 3");
    if (subdivisions < 1) throw std::invalid_argument("mesh: need at least one subdivision");
    if (!(half_width > 0.0)) throw std::invalid_argument("mesh: half width must be positive");

    SimplicialMesh m;
    m.dim_ = dim;
    m.half_width_ = half_width;
    m.subdivisions_ = subdivisions;

    const int n = subdivisions;
    const int np = n + 1;
    const double h = 2.0 * half_width / n;
    const int nz = dim == 3 ? np : 1;

    auto index = [&](int i, int j, int k) { return i + np * (j + np * k); };

    m.vertices_.reserve(static_cast<std::size_t>(np) * np * nz);
    m.boundary_mask_.reserve(m.vertices_.capacity());
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < np; ++j) {
            for (int i = 0; i < np; ++i) {
                Vec x(dim);
                // Boundary coordinates are set exactly to +-H.
                auto coord = [&](int c) { return c == n ? half_width : -half_width + c * h; };
                x[0] = coord(i);
                x[1] = coord(j);
                if (dim == 3) x[2] = coord(k);
                m.vertices_.push_back(x);
                const bool bdry = i == 0 || i == n || j == 0 || j == n ||
                                  (dim == 3 && (k == 0 || k == n));
                m.boundary_mask_.push_back(bdry ? 1 : 0);
            }
        }
    }

    // One simplex per permutation of the axes: walk from the cell's lower
    // corner to its upper corner, stepping one axis at a time.
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.begin() + dim));

    const int ncz = dim == 3 ? n : 1;
    for (int k = 0; k < ncz; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                for (const auto& p : perms) {
                    std::array<int, 3> c{i, j, k};
                    m.elements_.push_back(index(c[0], c[1], c[2]));
                    for (int s = 0; s < dim; ++s) {
                        ++c[p[s]];
                        m.elements_.push_back(index(c[0], c[1], c[2]));
                    }
                }
            }
        }
    }

    const std::size_t ne = m.elements_.size() / (dim + 1);
    m.element_volume_.resize(ne);
    m.basis_gradients_.resize(ne * (dim + 1));
    const double factorial = dim == 2 ? 2.0 : 6.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const auto el = m.element(e);
        const Vec& x0 = m.vertices_[el[0]];
        Mat jac(dim, dim);
        for (int s = 0; s < dim; ++s) jac.col(s) = m.vertices_[el[s + 1]] - x0;
        m.element_volume_[e] = std::abs(jac.determinant()) / factorial;
        // Rows of J^{-1} are the gradients of the barycentric coordinates
        // lambda_1..lambda_d; lambda_0 = 1 - sum.
        const Mat inv = jac.inverse();
        Vec g0 = Vec::Zero(dim);
        for (int s = 0; s < dim; ++s) {
            Vec g = inv.row(s).transpose();
            m.basis_gradients_[e * (dim + 1) + s + 1] = g;
            g0 -= g;
        }
        m.basis_gradients_[e * (dim + 1)] = g0;
    }
    return m;
}

Vec SimplicialMesh::element_gradient(std::size_t e, std::span<const double> nodal_values) const {
    if (e >= num_elements()) {
        throw std::out_of_range("element_gradient: element " + std::to_string(e) +
                                " out of range");
    }
    const auto el = element(e);
    Vec g = Vec::Zero(dim_);
    for (int k = 0; k <= dim_; ++k) g += nodal_values[el[k]] * basis_gradient(e, k);
    return g;
}

}  // namespace anipf
