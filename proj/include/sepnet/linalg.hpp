#pragma once

#include "sepnet/matrix.hpp"

#include <cstdint>
#include <vector>

namespace sepnet {

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double factor);
/// Sum over rows, as a 1 x cols matrix.
Matrix column_sums(const Matrix& m);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);

double frobenius_norm_sq(const Matrix& m);
double trace(const Matrix& m);

struct QrResult {
    Matrix q; // m x n, orthonormal columns
    Matrix r; // n x n, upper triangular, non-negative diagonal
};

/// Thin Householder QR of a tall (rows >= cols) full-column-rank matrix.
/// Throws SingularityError naming the first column whose pivot is below 1e-12.
QrResult qr_decompose(const Matrix& w);

/// Q factor of a uniform [-1, 1] m x n draw.
Matrix semi_orthogonal_init(std::size_t m, std::size_t n, std::uint64_t seed);

struct SymmetricEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& s);

struct PcaResult {
    Matrix projected;              // samples x k
    Matrix components;             // features x k, orthonormal columns
    std::vector<double> variances; // non-increasing
    std::vector<double> mean;      // feature means
};

PcaResult pca_fit(const Matrix& x, std::size_t k);
Matrix pca_reduce(const Matrix& x, std::size_t k);

} // namespace sepnet
