#include "anipf/diagnostics.hpp"
#include "anipf/fem.hpp"
#include "anipf/schemes.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace anipf;
using testutil::vec2;

namespace {

const double kEps = 1.0 / (16 * std::numbers::pi);

NodalField affine(const SimplicialMesh& m, const Vec& a, double c) {
    NodalField u(m.num_vertices());
    for (std::size_t i = 0; i < m.num_vertices(); ++i) u[i] = c + a.dot(m.vertex(i));
    return u;
}

double segment_distance(const Vec& x, const Vec& a, const Vec& b) {
    const Vec ab = b - a;
    const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (x - a - t * ab).norm();
}

/// Brute-force shape distance: fine gamma' polygon, radial function by ray
/// intersection, least-squares scale, symmetric Hausdorff distance.
double wulff_distance_oracle(const std::vector<Vec>& pts, const AnisotropyDensity& a) {
    const int n = 20000;
    std::vector<Vec> poly;
    for (int k = 0; k < n; ++k) {
        const double t = 2 * std::numbers::pi * k / n;
        poly.push_back(a.gamma_grad(vec2(std::cos(t), std::sin(t))));
    }
    auto radial = [&](const Vec& u) {
        for (int k = 0; k < n; ++k) {
            const Vec& p = poly[k];
            const Vec& q = poly[(k + 1) % n];
            // Solve r u = p + s (q - p).
            Eigen::Matrix2d m;
            m << u[0], p[0] - q[0], u[1], p[1] - q[1];
            if (std::abs(m.determinant()) < 1e-300) continue;
            const Eigen::Vector2d rs = m.inverse() * Eigen::Vector2d(p[0], p[1]);
            if (rs[0] > 0 && rs[1] >= -1e-12 && rs[1] <= 1 + 1e-12) return rs[0];
        }
        throw std::runtime_error("ray missed the polygon");
    };
    double num = 0, den = 0;
    for (const Vec& x : pts) {
        const double rho = radial(x / x.norm());
        num += x.norm() * rho;
        den += rho * rho;
    }
    const double s = num / den;
    double d1 = 0, d2 = 0;
    for (const Vec& x : pts) {
        double best = INFINITY;
        for (int k = 0; k < n; ++k) best = std::min(best, segment_distance(x / s, poly[k], poly[(k + 1) % n]));
        d1 = std::max(d1, best);
    }
    // The points close into a polygon in angular order.
    std::vector<std::pair<double, Vec>> ordered;
    for (const Vec& x : pts) ordered.emplace_back(std::atan2(x[1], x[0]), x / s);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    const std::size_t m = ordered.size();
    for (int k = 0; k < n; ++k) {
        for (int sub = 0; sub < 4; ++sub) {
            const Vec b = poly[k] + (poly[(k + 1) % n] - poly[k]) * (sub / 4.0);
            double best = INFINITY;
            for (std::size_t i = 0; i < m; ++i)
                best = std::min(best, segment_distance(b, ordered[i].second, ordered[(i + 1) % m].second));
            d2 = std::max(d2, best);
        }
    }
    return std::max(d1, d2);
}

}  // namespace

TEST_CASE("energy of pure phases and of the zero state") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 8);
    const auto a = make_regularized_l1(2, 0.3);
    const EnergyReport plus = discrete_energy(m, a, kEps, NodalField::Ones(m.num_vertices()));
    CHECK(plus.e_gamma_h == 0.0);
    CHECK(plus.mass == doctest::Approx(1.0));
    CHECK(discrete_energy(m, a, kEps, -NodalField::Ones(m.num_vertices())).e_gamma_h == 0.0);
    const EnergyReport zero = discrete_energy(m, a, kEps, NodalField::Zero(m.num_vertices()));
    CHECK(zero.e_gamma_h == doctest::Approx(0.5 / kEps).epsilon(1e-14));
    CHECK(zero.gradient_energy == 0.0);
    CHECK_FALSE(zero.f_gamma_h.has_value());
}

TEST_CASE("energy of affine data") {
    // Gradient part is exact: eps/2 |Omega| gamma(a)^2. Potential part is the
    // lumped quadrature of eps^-1 (1 - U^2)/2, within O(h^2) of the integral.
    const auto m = SimplicialMesh::uniform(2, 0.5, 32);
    const auto an = make_regularized_l1(2, 0.05);
    const Vec a = vec2(0.8, -0.6);
    const NodalField u = affine(m, a, 0.1);
    const EnergyReport e = discrete_energy(m, an, kEps, u);
    CHECK(e.gradient_energy == doctest::Approx(0.5 * kEps * an.gamma(a) * an.gamma(a)).epsilon(1e-13));
    // int_{[-1/2,1/2]^2} (1 - (0.1 + 0.8x - 0.6y)^2)/2 = (1 - 0.01 - (0.64 + 0.36)/12)/2
    const double exact = (1.0 - 0.01 - 1.0 / 12.0) / 2.0 / kEps;
    CHECK(std::abs(e.potential_energy - exact) < 1e-3 * exact);
    CHECK(e.e_gamma_h == doctest::Approx(e.gradient_energy + e.potential_energy));
    CHECK(e.mass == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("energy is nonnegative and rejects inadmissible data") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 8);
    const auto an = AnisotropyDensity::isotropic(2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int s = 0; s < 20; ++s) {
        NodalField u(m.num_vertices());
        for (auto& v : u) v = d(rng);
        CHECK(discrete_energy(m, an, kEps, u).e_gamma_h > 0.0);
    }
    NodalField bad = NodalField::Zero(m.num_vertices());
    bad[3] = 1.01;
    CHECK_THROWS_AS(discrete_energy(m, an, kEps, bad), std::invalid_argument);
}

TEST_CASE("Dirichlet energy functional and stability residual") {
    EnergyReport e;
    e.e_gamma_h = 3.0;
    CHECK(dirichlet_energy_functional(e, 1.0, kCPsi, -2.0, 0.5) == doctest::Approx(6.0 / kCPsi + 1.0));
    EnergyReport p, c;
    p.e_gamma_h = 2.0;
    c.e_gamma_h = 1.5;
    CHECK(stability_residual(p, c, {StabilityKind::allen_cahn, 0.4}) == doctest::Approx(-0.1));
    CHECK(stability_residual(p, c, {StabilityKind::cahn_hilliard, 0.6}) == doctest::Approx(0.1));
    CHECK_THROWS_AS(stability_residual(p, c, {StabilityKind::cahn_hilliard_dirichlet, 0.0}),
                    std::invalid_argument);
    p.f_gamma_h = 1.0;
    c.f_gamma_h = 0.25;
    CHECK(stability_residual(p, c, {StabilityKind::cahn_hilliard_dirichlet, 0.5}) == doctest::Approx(-0.25));
}

TEST_CASE("zero level set of linear data") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 10);
    const double x0 = 0.013;
    const NodalField u = affine(m, vec2(1, 0), -x0);
    const LevelSet ls = zero_level_set(m, u);
    REQUIRE_FALSE(ls.empty());
    for (const Vec& p : ls.points) CHECK(std::abs(p[0] - x0) < 1e-15);
    CHECK(ls.components == 1);
    CHECK_FALSE(ls.segments.empty());
    CHECK(zero_level_set(m, NodalField::Ones(m.num_vertices())).empty());
    CHECK(zero_level_set(m, NodalField::Ones(m.num_vertices())).components == 0);
}

TEST_CASE("zero level set of circle profiles") {
    const auto m = SimplicialMesh::uniform(2, 0.5, 64);
    const NodalField u = initial_profile(m, kEps, Ball{vec2(0.02, -0.01), 0.3});
    const LevelSet ls = zero_level_set(m, u, vec2(0.02, -0.01));
    CHECK(ls.components == 1);
    CHECK(std::abs(ls.mean_radius - 0.3) < m.mesh_size());
    CHECK(ls.min_radius <= ls.mean_radius);
    CHECK(ls.max_radius >= ls.mean_radius);

    const NodalField two =
        initial_profile(m, kEps, BallUnion{{Ball{vec2(-0.15, -0.15), 0.2}, Ball{vec2(0.2, 0.2), 0.15}}});
    CHECK(zero_level_set(m, two).components == 2);

    const auto m3 = SimplicialMesh::uniform(3, 0.5, 16);
    const NodalField u3 = initial_profile(m3, kEps, Ball{testutil::vec3(0, 0, 0), 0.3});
    const LevelSet ls3 = zero_level_set(m3, u3);
    CHECK(ls3.components == 1);
    CHECK(std::abs(ls3.mean_radius - 0.3) < m3.mesh_size());
}

TEST_CASE("wulff distance is zero on the wulff shape at any scale") {
    for (const auto& a : {AnisotropyDensity::isotropic(2), make_regularized_l1(2, 0.3)}) {
        auto pts = wulff_boundary_sample(a, 512);
        CHECK(wulff_shape_distance(pts, a, vec2(0, 0)) < 1e-2);
        for (auto& p : pts) p = 3.0 * p + vec2(0.2, 0.1);
        CHECK(wulff_shape_distance(pts, a, vec2(0.2, 0.1)) < 1e-2);
    }
    auto circle = wulff_boundary_sample(AnisotropyDensity::isotropic(2), 64);
    // Only the chords of the sample polygon remain: sagitta 1 - cos(pi/64).
    const double sagitta = 1.0 - std::cos(std::numbers::pi / 64);
    const double dc = wulff_shape_distance(circle, AnisotropyDensity::isotropic(2), vec2(0, 0));
    CHECK(dc <= sagitta * 1.01);
    CHECK(dc >= sagitta * 0.5);
}

TEST_CASE("wulff distance of a rounded square matches the brute-force oracle") {
    const auto a = make_regularized_l1(2, 0.01);
    std::vector<Vec> pts;
    for (int k = 0; k < 300; ++k) {
        const double t = 2 * std::numbers::pi * (k + 0.5) / 300;
        const double c = std::cos(t), s = std::sin(t);
        const double r = std::pow(std::pow(std::abs(c), 6) + std::pow(std::abs(s), 6), -1.0 / 6);
        pts.push_back(0.2 * r * vec2(c, s));
    }
    const double d = wulff_shape_distance(pts, a, vec2(0, 0));
    const double oracle = wulff_distance_oracle(pts, a);
    CHECK(oracle > 0.05);
    CHECK(d == doctest::Approx(oracle).epsilon(0.02));

    std::vector<Vec> circle;
    for (int k = 0; k < 300; ++k) {
        const double t = 2 * std::numbers::pi * (k + 0.5) / 300;
        circle.push_back(vec2(std::cos(t), std::sin(t)));
    }
    CHECK(wulff_shape_distance(circle, a, vec2(0, 0)) > d);
}

TEST_CASE("wulff distance input checks") {
    const auto a = AnisotropyDensity::isotropic(2);
    std::vector<Vec> few(5, vec2(1, 0));
    CHECK_THROWS_AS(wulff_shape_distance(few, a, vec2(0, 0)), std::invalid_argument);
    std::vector<Vec> centered(10, vec2(1, 0));
    centered[4] = vec2(0, 0);
    CHECK_THROWS_AS(wulff_shape_distance(centered, a, vec2(0, 0)), std::invalid_argument);
}
