#include "anipf/fem.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace anipf {

namespace {

/// Element loop shared by the stiffness assemblers. `metric(e)` returns the
/// d x d coefficient matrix on element e (already multiplied by any scalar
/// weight). Only k <= m entries are computed and mirrored, which keeps the
/// result exactly symmetric.
template <class Metric>
SparseSpdMatrix assemble(const SimplicialMesh& mesh, Metric&& metric) {
    const int nv = mesh.vertices_per_element();
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(mesh.num_elements() * nv * nv);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Mat coef = metric(e);
        const double vol = mesh.element_volume(e);
        const auto el = mesh.element(e);
        for (int k = 0; k < nv; ++k) {
            const Vec bk = coef * mesh.basis_gradient(e, k);
            for (int m = k; m < nv; ++m) {
                const double v = vol * mesh.basis_gradient(e, m).dot(bk);
                trips.emplace_back(el[k], el[m], v);
                if (m != k) trips.emplace_back(el[m], el[k], v);
            }
        }
    }
    const auto n = static_cast<int>(mesh.num_vertices());
    SparseSpdMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    k.makeCompressed();
    return k;
}

}  // namespace

NodalField lumped_mass(const SimplicialMesh& mesh) {
    NodalField m = NodalField::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    const double share = 1.0 / mesh.vertices_per_element();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        for (int v : mesh.element(e)) m[v] += share * mesh.element_volume(e);
    }
    return m;
}

double lumped_inner(const NodalField& mass, const NodalField& a, const NodalField& b) {
    return (mass.array() * a.array() * b.array()).sum();
}

SparseSpdMatrix assemble_stiffness(const SimplicialMesh& mesh) {
    const Mat id = Mat::Identity(mesh.dim(), mesh.dim());
    return assemble(mesh, [&](std::size_t) { return id; });
}

SparseSpdMatrix assemble_anisotropic_stiffness(const SimplicialMesh& mesh,
                                               const AnisotropyDensity& aniso,
                                               const NodalField& u_prev) {
    if (static_cast<std::size_t>(u_prev.size()) != mesh.num_vertices()) {
        throw std::invalid_argument("assemble_anisotropic_stiffness: field size mismatch");
    }
    if (aniso.dim() != mesh.dim()) {
        throw std::invalid_argument("assemble_anisotropic_stiffness: dimension mismatch");
    }
    const auto values = as_span(u_prev);
    return assemble(mesh, [&](std::size_t e) {
        return aniso.b_matrix(mesh.element_gradient(e, values));
    });
}

Mobility Mobility::constant(double b0) {
    if (!(b0 > 0.0)) throw std::invalid_argument("mobility: b0 must be positive");
    return Mobility(false, b0);
}

Mobility Mobility::degenerate() { return Mobility(true, 1.0); }

MobilityStiffness assemble_mobility_stiffness(const SimplicialMesh& mesh, const NodalField& u_prev,
                                              const std::function<double(double)>& mobility,
                                              double floor) {
    if (static_cast<std::size_t>(u_prev.size()) != mesh.num_vertices()) {
        throw std::invalid_argument("assemble_mobility_stiffness: field size mismatch");
    }
    MobilityStiffness out;
    std::vector<double> b(mesh.num_vertices());
    for (std::size_t j = 0; j < b.size(); ++j) {
        b[j] = mobility(u_prev[static_cast<Eigen::Index>(j)]);
        if (!(b[j] >= 0.0)) {
            throw std::invalid_argument("assemble_mobility_stiffness: negative mobility at vertex " +
                                        std::to_string(j));
        }
        if (b[j] < floor) {
            b[j] = floor;
            ++out.regularized_vertices;
        }
    }
    const Mat id = Mat::Identity(mesh.dim(), mesh.dim());
    const double share = 1.0 / mesh.vertices_per_element();
    out.matrix = assemble(mesh, [&](std::size_t e) {
        double mean = 0.0;
        for (int v : mesh.element(e)) mean += b[v];
        return Mat(share * mean * id);
    });
    return out;
}

}  // namespace anipf
