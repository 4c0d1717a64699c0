#pragma once

#include "sepnet/matrix.hpp"
#include "sepnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace testutil {

inline sepnet::Matrix random_matrix(std::size_t rows, std::size_t cols, sepnet::Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
    sepnet::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

// Plain triple loop, no kernels involved.
inline sepnet::Matrix naive_matmul(const sepnet::Matrix& a, const sepnet::Matrix& b) {
    sepnet::Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

inline sepnet::Matrix naive_transpose(const sepnet::Matrix& a) {
    sepnet::Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline double max_diff(const sepnet::Matrix& a, const sepnet::Matrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

// Central difference of f with respect to every entry of x, h = 1e-5.
inline sepnet::Matrix numeric_gradient(sepnet::Matrix& x, const std::function<double()>& f, double h = 1e-5) {
    sepnet::Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f();
        x.data()[i] = keep - h;
        const double down = f();
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// max |a - n| / max(1, |n|) style comparison; small gradients are judged absolutely.
inline double relative_error(const sepnet::Matrix& analytic, const sepnet::Matrix& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i];
        const double n = numeric.data()[i];
        const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

} // namespace testutil
