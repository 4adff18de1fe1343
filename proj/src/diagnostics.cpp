#include "anipf/diagnostics.hpp"

#include "anipf/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace anipf {

EnergyReport discrete_energy(const SimplicialMesh& mesh, const NodalField& lumped,
                             const AnisotropyDensity& aniso, double eps, const NodalField& u) {
    if (static_cast<std::size_t>(u.size()) != mesh.num_vertices() || lumped.size() != u.size()) {
        throw std::invalid_argument("discrete_energy: field size mismatch");
    }
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (!(std::abs(u[j]) <= 1.0 + 1e-12)) {
            throw std::invalid_argument("discrete_energy: U outside [-1, 1] at vertex " +
                                        std::to_string(j));
        }
    }
    EnergyReport r;
    const auto values = as_span(u);
    double grad = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double g = aniso.gamma(mesh.element_gradient(e, values));
        grad += mesh.element_volume(e) * g * g;
    }
    r.gradient_energy = 0.5 * eps * grad;
    double pot = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        pot += lumped[j] * 0.5 * std::max(0.0, 1.0 - u[j] * u[j]);
    }
    r.potential_energy = pot / eps;
    r.e_gamma_h = r.gradient_energy + r.potential_energy;
    r.mass = lumped.dot(u);
    return r;
}

EnergyReport discrete_energy(const SimplicialMesh& mesh, const AnisotropyDensity& aniso, double eps,
                             const NodalField& u) {
    return discrete_energy(mesh, lumped_mass(mesh), aniso, eps, u);
}

double dirichlet_energy_functional(const EnergyReport& report, double alpha, double c_psi,
                                   double w_bdry, double mass_raw) {
    return 2.0 * alpha / c_psi * report.e_gamma_h - w_bdry * mass_raw;
}

double stability_residual(const EnergyReport& prev, const EnergyReport& curr, const StepData& step) {
    if (step.kind == StabilityKind::cahn_hilliard_dirichlet) {
        if (!prev.f_gamma_h || !curr.f_gamma_h) {
            throw std::invalid_argument("stability_residual: Dirichlet step needs F values");
        }
        return *curr.f_gamma_h + step.dissipation - *prev.f_gamma_h;
    }
    return curr.e_gamma_h + step.dissipation - prev.e_gamma_h;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

LevelSet zero_level_set(const SimplicialMesh& mesh, const NodalField& u,
                        const std::optional<Vec>& center) {
    if (static_cast<std::size_t>(u.size()) != mesh.num_vertices()) {
        throw std::invalid_argument("zero_level_set: field size mismatch");
    }
    LevelSet ls;
    std::unordered_map<std::uint64_t, int> edge_point;
    std::vector<std::array<int, 4>> groups;  // crossing points per element, -1 padded
    const int nv = mesh.vertices_per_element();

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        std::array<int, 4> pts{-1, -1, -1, -1};
        int count = 0;
        for (int a = 0; a < nv; ++a) {
            for (int b = a + 1; b < nv; ++b) {
                int i = el[a], j = el[b];
                if ((u[i] > 0.0) == (u[j] > 0.0)) continue;
                if (i > j) std::swap(i, j);
                const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) |
                                          static_cast<std::uint32_t>(j);
                auto [it, inserted] = edge_point.try_emplace(key, static_cast<int>(ls.points.size()));
                if (inserted) {
                    const double t = u[i] / (u[i] - u[j]);
                    ls.points.push_back(mesh.vertex(i) + t * (mesh.vertex(j) - mesh.vertex(i)));
                }
                pts[count++] = it->second;
            }
        }
        if (count == 0) continue;
        groups.push_back(pts);
        if (mesh.dim() == 2 && count == 2) ls.segments.push_back({pts[0], pts[1]});
    }
    if (ls.points.empty()) return ls;

    UnionFind uf(ls.points.size());
    for (const auto& g : groups) {
        for (int k = 1; k < 4 && g[k] >= 0; ++k) uf.join(g[0], g[k]);
    }
    for (std::size_t i = 0; i < ls.points.size(); ++i) {
        if (uf.find(static_cast<int>(i)) == static_cast<int>(i)) ++ls.components;
    }

    const Vec c = center.value_or(Vec::Zero(mesh.dim()));
    ls.min_radius = INFINITY;
    double sum = 0.0;
    for (const Vec& p : ls.points) {
        const double r = (p - c).norm();
        ls.min_radius = std::min(ls.min_radius, r);
        ls.max_radius = std::max(ls.max_radius, r);
        sum += r;
    }
    ls.mean_radius = sum / static_cast<double>(ls.points.size());
    return ls;
}

namespace {

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

}  // namespace

double wulff_shape_distance(const std::vector<Vec>& points, const AnisotropyDensity& aniso,
                            const Vec& center) {
    if (points.size() < 8) throw std::invalid_argument("wulff_shape_distance: need >= 8 points");
    const int d = aniso.dim();
    const int n_dirs = d == 2 ? 4096 : 4000;
    const std::vector<Vec> dirs = unit_directions(d, n_dirs);
    std::vector<double> support(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) support[k] = aniso.gamma(dirs[k]);

    // Radial function of {x : x.n <= gamma(n) for all n}.
    auto radial = [&](const Vec& u) {
        double r = INFINITY;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const double c = u.dot(dirs[k]);
            if (c > 1e-12) r = std::min(r, support[k] / c);
        }
        return r;
    };

    std::vector<Vec> rel;
    double num = 0.0, den = 0.0;
    for (const Vec& p : points) {
        Vec x = p - center;
        const double len = x.norm();
        if (!(len > 0.0)) throw std::invalid_argument("wulff_shape_distance: point at center");
        const double rho = radial(x / len);
        num += len * rho;
        den += rho * rho;
        rel.push_back(x);
    }
    const double scale = num / den;
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("wulff_shape_distance: degenerate point set");
    }
    for (Vec& x : rel) x /= scale;

    std::vector<Vec> boundary;
    for (const Vec& n : dirs) boundary.push_back(aniso.gamma_grad(n));

    double d_points = 0.0;
    if (d == 2) {
        // Densify the boundary polygon; nearly flat facets are sampled very
        // sparsely by gamma' at equispaced normals.
        std::vector<Vec> dense;
        const double spacing = 1e-3 * std::max(boundary[0].norm(), 1e-300);
        for (std::size_t k = 0; k < boundary.size(); ++k) {
            const Vec& a = boundary[k];
            const Vec& b = boundary[(k + 1) % boundary.size()];
            const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
            for (int s = 0; s < pieces; ++s) dense.push_back(a + (b - a) * (double(s) / pieces));
        }
        for (const Vec& x : rel) {
            double best = INFINITY;
            for (std::size_t k = 0; k < boundary.size(); ++k) {
                best = std::min(best, point_segment_distance(x, boundary[k],
                                                             boundary[(k + 1) % boundary.size()]));
            }
            d_points = std::max(d_points, best);
        }
        boundary = std::move(dense);
    } else {
        for (const Vec& x : rel) {
            double best = INFINITY;
            for (const Vec& b : boundary) best = std::min(best, (x - b).norm());
            d_points = std::max(d_points, best);
        }
    }

    double d_boundary = 0.0;
    if (d == 2) {
        // Close the points into a polygon ordered by angle about the center
        // (the interface is assumed star-shaped with respect to it).
        std::sort(rel.begin(), rel.end(), [](const Vec& a, const Vec& b) {
            return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
        });
        for (const Vec& b : boundary) {
            double best = INFINITY;
            for (std::size_t k = 0; k < rel.size(); ++k) {
                best = std::min(best, point_segment_distance(b, rel[k], rel[(k + 1) % rel.size()]));
            }
            d_boundary = std::max(d_boundary, best);
        }
    } else {
        for (const Vec& b : boundary) {
            double best = INFINITY;
            for (const Vec& x : rel) best = std::min(best, (x - b).norm());
            d_boundary = std::max(d_boundary, best);
        }
    }
    return std::max(d_points, d_boundary);
}

}  // namespace anipf
