#pragma once

#include "anipf/types.hpp"

#include <Eigen/Dense>

#include <random>

namespace testutil {

inline anipf::Vec vec2(double x, double y) {
    anipf::Vec v(2);
    v << x, y;
    return v;
}

inline anipf::Vec vec3(double x, double y, double z) {
    anipf::Vec v(3);
    v << x, y, z;
    return v;
}

inline anipf::Vec random_vec(std::mt19937_64& rng, int dim, double scale = 1.0) {
    std::normal_distribution<double> n01;
    anipf::Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * n01(rng);
    return v;
}

inline Eigen::MatrixXd dense(const anipf::SparseSpdMatrix& a) { return Eigen::MatrixXd(a); }

}  // namespace testutil
