#include "anipf/fem.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <random>

using namespace anipf;

namespace {

NodalField affine(const SimplicialMesh& m, const Vec& a, double c) {
    NodalField u(m.num_vertices());
    for (std::size_t i = 0; i < m.num_vertices(); ++i) u[i] = c + a.dot(m.vertex(i));
    return u;
}

NodalField random_field(const SimplicialMesh& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NodalField f(m.num_vertices());
    for (auto& v : f) v = u(rng);
    return f;
}

}  // namespace

TEST_CASE("lumped mass integrates constants and matches element sums") {
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.5, 4);
        const NodalField d = lumped_mass(m);
        CHECK(d.sum() == doctest::Approx(m.domain_volume()).epsilon(1e-13));
        NodalField oracle = NodalField::Zero(m.num_vertices());
        for (std::size_t e = 0; e < m.num_elements(); ++e)
            for (int v : m.element(e)) oracle[v] += m.element_volume(e) / (dim + 1);
        CHECK((d - oracle).norm() < 1e-15);
        const NodalField one = NodalField::Ones(m.num_vertices());
        CHECK(lumped_inner(d, one, one) == doctest::Approx(m.domain_volume()));
    }
}

TEST_CASE("stiffness matrix properties") {
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.5, 4);
        const auto k = testutil::dense(assemble_stiffness(m));
        CHECK((k - k.transpose()).norm() == 0.0);
        CHECK((k * Eigen::VectorXd::Ones(k.rows())).norm() < 1e-12);
        // (grad x1, grad x1) = |Omega|
        Vec a = Vec::Zero(dim);
        a[0] = 1.0;
        const NodalField x = affine(m, a, 0.0);
        CHECK(x.dot(k * x) == doctest::Approx(m.domain_volume()).epsilon(1e-12));
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("anisotropic stiffness reduces to the laplacian for the isotropic density") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 5);
    const auto iso = AnisotropyDensity::isotropic(2);
    const auto k = testutil::dense(assemble_stiffness(m));
    const auto kb = testutil::dense(assemble_anisotropic_stiffness(m, iso, random_field(m, 1)));
    CHECK((k - kb).norm() < 1e-12);
    const auto k0 = testutil::dense(assemble_anisotropic_stiffness(m, iso, NodalField::Zero(m.num_vertices())));
    CHECK((k - k0).norm() < 1e-12);
}

TEST_CASE("anisotropic stiffness quadratic form is the anisotropic gradient energy") {
    // U^T K_B(U) U = sum_sigma |sigma| gamma(grad U)^2, since B(q) q . q = gamma(q)^2.
    for (int dim : {2, 3}) {
        const auto m = SimplicialMesh::uniform(dim, 0.5, 3);
        const auto a = make_regularized_l1(dim, 0.05);
        const NodalField u = random_field(m, 7 + dim);
        const auto kb = assemble_anisotropic_stiffness(m, a, u);
        double oracle = 0.0;
        for (std::size_t e = 0; e < m.num_elements(); ++e) {
            const double g = a.gamma(m.element_gradient(e, as_span(u)));
            oracle += m.element_volume(e) * g * g;
        }
        CHECK(u.dot(kb * u) == doctest::Approx(oracle).epsilon(1e-12));
        const auto kd = testutil::dense(kb);
        CHECK((kd - kd.transpose()).norm() == 0.0);
    }
}

TEST_CASE("anisotropic stiffness checks sizes") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 2);
    CHECK_THROWS_AS(assemble_anisotropic_stiffness(m, AnisotropyDensity::isotropic(2), NodalField::Zero(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_anisotropic_stiffness(m, AnisotropyDensity::isotropic(3),
                                                   NodalField::Zero(m.num_vertices())),
                    std::invalid_argument);
}

TEST_CASE("mobility weighted stiffness") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 4);
    const auto k = testutil::dense(assemble_stiffness(m));
    const NodalField u = random_field(m, 3);

    const auto b2 = Mobility::constant(2.0);
    const auto kc = assemble_mobility_stiffness(m, u, b2);
    CHECK((testutil::dense(kc.matrix) - 2.0 * k).norm() < 1e-12);
    CHECK(kc.regularized_vertices == 0);

    // Element factor is the mean of the vertex values of b(U).
    const auto deg = Mobility::degenerate();
    const auto kd = assemble_mobility_stiffness(m, u, deg);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(k.rows(), k.cols());
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const auto el = m.element(e);
        double mean = 0.0;
        for (int v : el) mean += 1.0 - u[v] * u[v];
        mean /= 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                oracle(el[i], el[j]) +=
                    mean * m.element_volume(e) * m.basis_gradient(e, i).dot(m.basis_gradient(e, j));
    }
    CHECK((testutil::dense(kd.matrix) - oracle).norm() < 1e-12);

    NodalField pure = NodalField::Ones(m.num_vertices());
    pure[0] = 0.0;
    const auto kf = assemble_mobility_stiffness(m, pure, deg, 1e-12);
    CHECK(kf.regularized_vertices == m.num_vertices() - 1);
    const auto knf = assemble_mobility_stiffness(m, pure, deg, 0.0);
    CHECK(knf.regularized_vertices == 0);

    CHECK_THROWS_AS(assemble_mobility_stiffness(m, NodalField::Constant(m.num_vertices(), 2.0), deg),
                    std::invalid_argument);
}

TEST_CASE("mobility values") {
    CHECK(Mobility::constant(2.0)(0.3) == 2.0);
    CHECK(Mobility::degenerate()(0.5) == doctest::Approx(0.75));
    CHECK(Mobility::degenerate().is_degenerate());
    CHECK_THROWS_AS(Mobility::constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Mobility::constant(-1.0), std::invalid_argument);
}
