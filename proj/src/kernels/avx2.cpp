// Compiled with -mavx2 -mfma. Elementwise kernels use separate multiply and add
// (no FMA) so they round exactly like the scalar reference.
#include "sepnet/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace sepnet::kernels::detail {

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_sq_avx2(const double* x, std::size_t n) {
    return dot_avx2(x, x, n);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void sgd_update_avx2(double* param, const double* grad, double* velocity, std::size_t n, double lr,
                     double momentum, double weight_decay) {
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d vmom = _mm256_set1_pd(momentum);
    const __m256d vwd = _mm256_set1_pd(weight_decay);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(param + i);
        const __m256d g = _mm256_add_pd(_mm256_loadu_pd(grad + i), _mm256_mul_pd(vwd, p));
        const __m256d v = _mm256_add_pd(_mm256_mul_pd(vmom, _mm256_loadu_pd(velocity + i)), g);
        _mm256_storeu_pd(velocity + i, v);
        _mm256_storeu_pd(param + i, _mm256_sub_pd(p, _mm256_mul_pd(vlr, v)));
    }
    for (; i < n; ++i) {
        const double g = grad[i] + weight_decay * param[i];
        velocity[i] = momentum * velocity[i] + g;
        param[i] -= lr * velocity[i];
    }
}

bool all_finite_avx2(const double* x, std::size_t n) {
    // x - x is NaN exactly when x is NaN or infinite.
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_sub_pd(v, v));
    }
    if (_mm256_movemask_pd(_mm256_cmp_pd(acc, acc, _CMP_UNORD_Q)) != 0) return false;
    for (; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        "avx2", dot_avx2, sum_sq_avx2, axpy_avx2, sgd_update_avx2, all_finite_avx2,
    };
    return table;
}

} // namespace sepnet::kernels::detail
