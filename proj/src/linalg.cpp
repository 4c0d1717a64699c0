#include "sepnet/linalg.hpp"

#include "sepnet/error.hpp"
#include "sepnet/kernels.hpp"
#include "sepnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sepnet {

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                     b.shape_string());
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(op, a, b);
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out = c.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            // Sparse inputs (MNIST pixels, relu outputs) are mostly zero.
            if (aip == 0.0) continue;
            k.axpy(aip, b.row(p).data(), out, b.cols());
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) shape_mismatch("matmul_tn", a, b);
    const auto& k = kernels::active();
    Matrix c(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.rows(); ++p) {
        const double* brow = b.row(p).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double api = a(p, i);
            if (api == 0.0) continue;
            k.axpy(api, brow, c.row(i).data(), b.cols());
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) shape_mismatch("matmul_nt", a, b);
    const auto& k = kernels::active();
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j)
            c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape("add", a, b);
    Matrix c = a;
    kernels::active().axpy(1.0, b.data().data(), c.data().data(), c.size());
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape("subtract", a, b);
    Matrix c = a;
    auto out = c.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
    return c;
}

Matrix scale(const Matrix& m, double factor) {
    Matrix c = m;
    for (double& v : c.data()) v *= factor;
    return c;
}

Matrix column_sums(const Matrix& m) {
    Matrix s(1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        kernels::active().axpy(1.0, m.row(i).data(), s.data().data(), m.cols());
    return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape("max_abs_diff", a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double max_abs(const Matrix& m) {
    double worst = 0.0;
    for (double v : m.data()) worst = std::max(worst, std::abs(v));
    return worst;
}

double frobenius_norm_sq(const Matrix& m) {
    return kernels::active().sum_sq(m.data().data(), m.size());
}

double trace(const Matrix& m) {
    if (!m.is_square()) throw ShapeError("trace: matrix " + m.shape_string() + " is not square");
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
    return s;
}

QrResult qr_decompose(const Matrix& w) {
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();
    if (m < n)
        throw ShapeError("qr_decompose: need rows >= cols, got " + w.shape_string());

    constexpr double pivot_tol = 1e-12;
    Matrix a = w;
    std::vector<std::vector<double>> reflectors;
    std::vector<double> reflector_norm_sq;
    reflectors.reserve(n);

    for (std::size_t k = 0; k < n; ++k) {
        double norm_sq = 0.0;
        for (std::size_t i = k; i < m; ++i) norm_sq += a(i, k) * a(i, k);
        const double norm = std::sqrt(norm_sq);
        if (norm < pivot_tol)
            throw SingularityError("qr_decompose: column " + std::to_string(k) +
                                   " is numerically dependent on earlier columns (pivot " +
                                   std::to_string(norm) + ")");

        const double alpha = a(k, k) >= 0.0 ? -norm : norm;
        std::vector<double> v(m - k);
        for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
        v[0] -= alpha;
        double vv = 0.0;
        for (double x : v) vv += x * x;

        if (vv > 0.0) {
            for (std::size_t j = k; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = k; i < m; ++i) s += v[i - k] * a(i, j);
                s = 2.0 * s / vv;
                for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i - k];
            }
        }
        reflectors.push_back(std::move(v));
        reflector_norm_sq.push_back(vv);
    }

    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) r(i, j) = a(i, j);

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I_m.
    Matrix q(m, n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
    for (std::size_t kk = n; kk-- > 0;) {
        const auto& v = reflectors[kk];
        const double vv = reflector_norm_sq[kk];
        if (vv == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * q(i, j);
            s = 2.0 * s / vv;
            for (std::size_t i = kk; i < m; ++i) q(i, j) -= s * v[i - kk];
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (r(k, k) >= 0.0) continue;
        for (std::size_t j = k; j < n; ++j) r(k, j) = -r(k, j);
        for (std::size_t i = 0; i < m; ++i) q(i, k) = -q(i, k);
    }
    return {std::move(q), std::move(r)};
}

Matrix semi_orthogonal_init(std::size_t m, std::size_t n, std::uint64_t seed) {
    if (m < n)
        throw ShapeError("semi_orthogonal_init: need m >= n, got " + std::to_string(m) + "x" +
                         std::to_string(n));
    Rng rng(seed);
    Matrix w(m, n);
    for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
    return qr_decompose(w).q;
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
    if (!s.is_square()) throw ShapeError("symmetric_eigen: matrix " + s.shape_string() + " is not square");
    const std::size_t n = s.rows();
    Matrix a = s;
    Matrix v = Matrix::identity(n);

    auto off_norm_sq = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) acc += a(i, j) * a(i, j);
        return acc;
    };

    constexpr double tol = 1e-12;
    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm_sq() >= tol * tol; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                if (sn == 0.0) continue;
                rotated = true;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        // Sign convention: the largest-magnitude entry of each vector is positive.
        std::size_t pivot = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(pivot, src))) pivot = i;
        const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
    }
    return out;
}

PcaResult pca_fit(const Matrix& x, std::size_t k) {
    const std::size_t samples = x.rows();
    const std::size_t features = x.cols();
    if (k == 0 || k > features)
        throw ShapeError("pca: cannot take " + std::to_string(k) + " components of " +
                         std::to_string(features) + " features");
    if (samples < 2) throw ShapeError("pca: need at least 2 samples, got " + std::to_string(samples));

    std::vector<double> mean(features, 0.0);
    for (std::size_t i = 0; i < samples; ++i)
        for (std::size_t j = 0; j < features; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(samples);

    Matrix centered = x;
    for (std::size_t i = 0; i < samples; ++i)
        for (std::size_t j = 0; j < features; ++j) centered(i, j) -= mean[j];

    Matrix cov = scale(matmul_tn(centered, centered), 1.0 / static_cast<double>(samples - 1));
    // Symmetrize away rounding so Jacobi sees an exactly symmetric input.
    for (std::size_t i = 0; i < features; ++i)
        for (std::size_t j = i + 1; j < features; ++j) {
            const double avg = 0.5 * (cov(i, j) + cov(j, i));
            cov(i, j) = avg;
            cov(j, i) = avg;
        }

    SymmetricEigen eig = symmetric_eigen(cov);
    Matrix components(features, k);
    for (std::size_t i = 0; i < features; ++i)
        for (std::size_t c = 0; c < k; ++c) components(i, c) = eig.vectors(i, c);

    PcaResult out{matmul(centered, components), std::move(components),
                  std::vector<double>(eig.values.begin(), eig.values.begin() + static_cast<long>(k)),
                  std::move(mean)};
    return out;
}

Matrix pca_reduce(const Matrix& x, std::size_t k) {
    return pca_fit(x, k).projected;
}

} // namespace sepnet
