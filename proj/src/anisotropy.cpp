#include "anipf/anisotropy.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace anipf {

namespace {

void require_dim(int dim) {
    if (dim != 2 && dim != 3) {
        throw std::invalid_argument("anisotropy: dimension must be 2 or 3, got " +
                                    std::to_string(dim));
    }
}

}  // namespace

AnisotropyDensity::AnisotropyDensity(int dim, std::vector<Mat> matrices)
    : dim_(dim), matrices_(std::move(matrices)) {
    require_dim(dim_);
    if (matrices_.empty()) {
        throw std::invalid_argument("anisotropy: need at least one matrix");
    }
    for (std::size_t l = 0; l < matrices_.size(); ++l) {
        const Mat& g = matrices_[l];
        if (g.rows() != dim_ || g.cols() != dim_) {
            throw std::invalid_argument("anisotropy: matrix " + std::to_string(l) +
                                        " has wrong shape");
        }
        if (!g.allFinite() || g != g.transpose()) {
            throw std::invalid_argument("anisotropy: matrix " + std::to_string(l) +
                                        " is not symmetric");
        }
        Eigen::LLT<Mat> llt(g);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("anisotropy: matrix " + std::to_string(l) +
                                        " is not positive definite");
        }
    }
}

AnisotropyDensity AnisotropyDensity::isotropic(int dim) {
    require_dim(dim);
    return AnisotropyDensity(dim, {Mat::Identity(dim, dim)});
}

double AnisotropyDensity::gamma_component(std::size_t l, const Vec& p) const {
    // p.G p >= 0 in exact arithmetic; clip rounding noise.
    return std::sqrt(std::max(0.0, p.dot(matrices_[l] * p)));
}

double AnisotropyDensity::gamma(const Vec& p) const {
    double sum = 0.0;
    for (std::size_t l = 0; l < matrices_.size(); ++l) sum += gamma_component(l, p);
    return sum;
}

Vec AnisotropyDensity::gamma_grad(const Vec& p) const {
    if (p.isZero(0.0)) throw std::domain_error("gamma_grad: gamma is not differentiable at 0");
    Vec grad = Vec::Zero(dim_);
    for (std::size_t l = 0; l < matrices_.size(); ++l) {
        grad += (matrices_[l] * p) / gamma_component(l, p);
    }
    return grad;
}

double AnisotropyDensity::a_value(const Vec& p) const {
    const double g = gamma(p);
    return 0.5 * g * g;
}

Vec AnisotropyDensity::a_grad(const Vec& p) const {
    // A is C^1 with A'(0) = 0 even though gamma is not differentiable there.
    if (p.isZero(0.0)) return Vec::Zero(dim_);
    return gamma(p) * gamma_grad(p);
}

Mat AnisotropyDensity::b_matrix(const Vec& q) const {
    const auto n = static_cast<double>(matrices_.size());
    Mat sum = Mat::Zero(dim_, dim_);

    // gamma_l(q) >= sqrt(lambda_min(G_l)) |q| > 0 for q != 0, so the guard
    // only fires for q == 0 (or a q so small that |q| itself underflows).
    const double qnorm = q.norm();
    bool zero = qnorm == 0.0;
    std::vector<double> comps(matrices_.size());
    for (std::size_t l = 0; l < matrices_.size() && !zero; ++l) {
        comps[l] = gamma_component(l, q);
        if (comps[l] < 1e-300 * qnorm || comps[l] == 0.0) zero = true;
    }
    if (zero) {
        for (const Mat& g : matrices_) sum += g;
        return n * sum;
    }
    double g = 0.0;
    for (double c : comps) g += c;
    for (std::size_t l = 0; l < matrices_.size(); ++l) sum += matrices_[l] / comps[l];
    return g * sum;
}

AnisotropyDensity AnisotropyDensity::rotated(const Mat& rotation) const {
    if (rotation.rows() != dim_ || rotation.cols() != dim_) {
        throw std::invalid_argument("rotate: rotation has wrong shape");
    }
    const Mat defect = rotation.transpose() * rotation - Mat::Identity(dim_, dim_);
    if (defect.cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("rotate: matrix is not orthogonal");
    }
    std::vector<Mat> out;
    out.reserve(matrices_.size());
    for (const Mat& g : matrices_) {
        Mat r = rotation * g * rotation.transpose();
        // Restore exact symmetry lost to rounding.
        out.push_back(0.5 * (r + r.transpose()));
    }
    return AnisotropyDensity(dim_, std::move(out));
}

AnisotropyDensity make_regularized_l1(int dim, double delta) {
    require_dim(dim);
    if (!(delta > 0.0)) {
        throw std::invalid_argument("regularized l1: delta must be positive");
    }
    const double d2 = delta * delta;
    std::vector<Mat> mats;
    for (int j = 0; j < dim; ++j) {
        Mat g = d2 * Mat::Identity(dim, dim);
        g(j, j) += 1.0 - d2;
        mats.push_back(g);
    }
    return AnisotropyDensity(dim, std::move(mats));
}

Mat rotation_2d(double angle_rad) {
    Mat r(2, 2);
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    r << c, -s, s, c;
    return r;
}

Mat rotation_3d(int axis, double angle_rad) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("rotation_3d: axis must be 0, 1 or 2");
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    const int i = (axis + 1) % 3, j = (axis + 2) % 3;
    Mat r = Mat::Identity(3, 3);
    r(i, i) = c;
    r(i, j) = -s;
    r(j, i) = s;
    r(j, j) = c;
    return r;
}

std::vector<Vec> unit_directions(int dim, int count) {
    require_dim(dim);
    if (count < 1) throw std::invalid_argument("unit_directions: count must be positive");
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / count;
            Vec n(2);
            n << std::cos(phi), std::sin(phi);
            dirs.push_back(n);
        }
        return dirs;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * k;
        Vec n(3);
        n << r * std::cos(phi), r * std::sin(phi), z;
        dirs.push_back(n);
    }
    return dirs;
}

std::vector<Vec> wulff_boundary_sample(const AnisotropyDensity& aniso, int n_dirs) {
    if (aniso.dim() == 2 && n_dirs < 3) {
        throw std::invalid_argument("wulff_boundary_sample: need at least 3 directions in 2d");
    }
    std::vector<Vec> out;
    for (const Vec& n : unit_directions(aniso.dim(), n_dirs)) out.push_back(aniso.gamma_grad(n));
    return out;
}

InequalityReport check_inequalities(const AnisotropyDensity& aniso, std::size_t samples,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(-10.0, 10.0);
    const int d = aniso.dim();

    auto random_vec = [&] {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = normal(rng);
        return Vec(v * std::pow(10.0, log_scale(rng)));
    };

    InequalityReport rep;
    rep.samples = samples;
    rep.dual_estimate = rep.monotonicity = rep.cauchy_schwarz = -INFINITY;
    rep.linearized_monotonicity = rep.stability = -INFINITY;
    constexpr double kTol = 1e-10;

    for (std::size_t s = 0; s < samples; ++s) {
        Vec p = random_vec();
        Vec q;
        switch (s % 10) {
            case 0: q = Vec::Zero(d); break;
            case 1: q = unit(rng) * p; break;  // collinear, either orientation
            case 2: p = Vec::Zero(d); q = random_vec(); break;
            default: q = random_vec(); break;
        }
        const double scale = 1.0 + p.squaredNorm() + q.squaredNorm();
        const double gp = aniso.gamma(p), gq = aniso.gamma(q);
        const Mat bq = aniso.b_matrix(q);
        const Vec bqp = bq * p;

        double worst = -INFINITY;
        auto record = [&](double& slot, double violation) {
            const double v = violation / scale;
            slot = std::max(slot, v);
            worst = std::max(worst, v);
        };

        if (!p.isZero(0.0)) {
            record(rep.dual_estimate, aniso.gamma_grad(p).dot(q) - gq);
            record(rep.monotonicity, gp * (gp - gq) - aniso.a_grad(p).dot(p - q));
        }
        if (!q.isZero(0.0)) {
            double cs = 0.0;
            for (std::size_t l = 0; l < aniso.size(); ++l) {
                const double gpl = aniso.gamma_component(l, p);
                cs += gpl * gpl / aniso.gamma_component(l, q);
            }
            record(rep.cauchy_schwarz, aniso.a_value(p) - 0.5 * gq * cs);
        }
        record(rep.linearized_monotonicity, gp * (gp - gq) - bqp.dot(p - q));
        record(rep.stability, aniso.a_value(p) - aniso.a_value(q) - bqp.dot(p - q));

        if (worst > kTol) ++rep.failures;
    }
    return rep;
}

}  // namespace anipf
