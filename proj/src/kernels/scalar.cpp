#include "sepnet/kernels.hpp"

#include <cmath>

namespace sepnet::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_sq_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sgd_update_scalar(double* param, const double* grad, double* velocity, std::size_t n, double lr,
                       double momentum, double weight_decay) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i] + weight_decay * param[i];
        velocity[i] = momentum * velocity[i] + g;
        param[i] -= lr * velocity[i];
    }
}

bool all_finite_scalar(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

} // namespace

const KernelTable& scalar() {
    static const KernelTable table{
        "scalar", dot_scalar, sum_sq_scalar, axpy_scalar, sgd_update_scalar, all_finite_scalar,
    };
    return table;
}

} // namespace sepnet::kernels
