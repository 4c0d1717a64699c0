#pragma once

#include <cstddef>
#include <string_view>

namespace sepnet::kernels {

// Inner-loop primitives. Every backend must give bit-identical results for the
// elementwise kernels (axpy, sgd_update, all_finite); reductions (dot, sum_sq)
// may differ by reassociation only.
struct KernelTable {
    std::string_view name;

    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // g' = g + wd * p ; v = momentum * v + g' ; p -= lr * v
    void (*sgd_update)(double* param, const double* grad, double* velocity, std::size_t n,
                       double lr, double momentum, double weight_decay);
    bool (*all_finite)(const double* x, std::size_t n);
};

const KernelTable& scalar();

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2.
const KernelTable* avx2();

/// Backend picked once at first use: AVX2 when available, else scalar.
/// SEPNET_SIMD=scalar in the environment forces the scalar path.
const KernelTable& active();

} // namespace sepnet::kernels
