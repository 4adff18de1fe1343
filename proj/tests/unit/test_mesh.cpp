#include "anipf/mesh.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace anipf;

TEST_CASE("uniform mesh sizes") {
    const auto m2 = SimplicialMesh::uniform(2, 0.5, 8);
    CHECK(m2.num_vertices() == 81);
    CHECK(m2.num_elements() == 2 * 8 * 8);
    CHECK(m2.vertices_per_element() == 3);
    CHECK(m2.mesh_size() == doctest::Approx(0.125));
    const auto m3 = SimplicialMesh::uniform(3, 1.0, 4);
    CHECK(m3.num_vertices() == 125);
    CHECK(m3.num_elements() == 6 * 4 * 4 * 4);
    CHECK(m3.domain_volume() == doctest::Approx(8.0));
}

TEST_CASE("element volumes fill the box") {
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.7, 5);
        double total = 0.0;
        for (std::size_t e = 0; e < m.num_elements(); ++e) {
            CHECK(m.element_volume(e) > 0.0);
            total += m.element_volume(e);
        }
        CHECK(total == doctest::Approx(m.domain_volume()).epsilon(1e-13));
    }
}

TEST_CASE("boundary vertices lie exactly on the box faces") {
    const int n = 6;
    const auto m = SimplicialMesh::uniform(2, 0.5, n);
    int count = 0;
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
        const Vec& x = m.vertex(i);
        const bool face = std::abs(x[0]) == 0.5 || std::abs(x[1]) == 0.5;
        CHECK(face == m.on_boundary(i));
        count += m.on_boundary(i);
    }
    CHECK(count == 4 * n);
    const auto m3 = SimplicialMesh::uniform(3, 0.5, 3);
    int count3 = 0;
    for (std::size_t i = 0; i < m3.num_vertices(); ++i) count3 += m3.on_boundary(i);
    CHECK(count3 == 64 - 8);
}

TEST_CASE("P1 gradients are exact for affine data") {
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.5, 4);
        Vec a(dim);
        for (int k = 0; k < dim; ++k) a[k] = 0.3 * (k + 1) - 0.5;
        NodalField u(m.num_vertices());
        for (std::size_t i = 0; i < m.num_vertices(); ++i) u[i] = 0.25 + a.dot(m.vertex(i));
        for (std::size_t e = 0; e < m.num_elements(); ++e) {
            CHECK((m.element_gradient(e, as_span(u)) - a).norm() < 1e-13);
            Vec sum = Vec::Zero(dim);
            for (int k = 0; k <= dim; ++k) sum += m.basis_gradient(e, k);
            CHECK(sum.norm() < 1e-12);
        }
    }
}

TEST_CASE("triangulation is conforming") {
    // Every interior edge (2d) / face (3d) is shared by exactly two simplices,
    // every boundary one by exactly one.
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.5, 3);
        std::map<std::vector<int>, int> faces;
        for (std::size_t e = 0; e < m.num_elements(); ++e) {
            const auto el = m.element(e);
            for (int skip = 0; skip <= dim; ++skip) {
                std::vector<int> f;
                for (int k = 0; k <= dim; ++k)
                    if (k != skip) f.push_back(el[k]);
                std::sort(f.begin(), f.end());
                ++faces[f];
            }
        }
        for (const auto& [f, count] : faces) {
            const bool on_bdry = std::all_of(f.begin(), f.end(), [&](int v) { return m.on_boundary(v); });
            CHECK(count <= 2);
            if (!on_bdry) CHECK(count == 2);
        }
        std::size_t boundary_faces = 0;
        for (const auto& [f, count] : faces) boundary_faces += count == 1;
        // 4 sides x 3 edges; 6 faces x 9 squares x 2 triangles
        CHECK(boundary_faces == (dim == 2 ? 12u : 108u));
    }
}

TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(SimplicialMesh::uniform(1, 0.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(SimplicialMesh::uniform(2, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SimplicialMesh::uniform(2, 0.5, 0), std::invalid_argument);
    const auto m = SimplicialMesh::uniform(2, 0.5, 2);
    const NodalField u = NodalField::Zero(m.num_vertices());
    CHECK_THROWS_AS(m.element_gradient(m.num_elements(), as_span(u)), std::out_of_range);
}
