#include "sepnet/error.hpp"
#include "sepnet/linalg.hpp"
#include "sepnet/separability.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sepnet;
using testutil::max_diff;
using testutil::random_matrix;

TEST_CASE("matmul hand examples") {
    const Matrix m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    CHECK(matmul(Matrix::identity(3), m) == m);
    CHECK(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0, 1}, {1, 0}}) == Matrix{{2, 1}, {4, 3}});
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
    try {
        matmul(Matrix(2, 3), Matrix(4, 5));
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        const std::string what = e.what();
        CHECK(what.find("2x3") != std::string::npos);
        CHECK(what.find("4x5") != std::string::npos);
    }
}

TEST_CASE("matmul variants agree with the triple loop") {
    Rng rng(1);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t r = 1 + rng.below(9), k = 1 + rng.below(9), c = 1 + rng.below(9);
        const Matrix a = random_matrix(r, k, rng);
        const Matrix b = random_matrix(k, c, rng);
        const Matrix ref = testutil::naive_matmul(a, b);
        CHECK(max_diff(matmul(a, b), ref) < 1e-12);
        CHECK(max_diff(matmul_tn(testutil::naive_transpose(a), b), ref) < 1e-12);
        CHECK(max_diff(matmul_nt(a, testutil::naive_transpose(b)), ref) < 1e-12);
    }
    Rng rng2(4);
    const Matrix a = random_matrix(4, 3, rng2);
    const Matrix b = random_matrix(3, 5, rng2);
    CHECK(max_diff(matmul(a, b), testutil::naive_matmul(a, b)) < 1e-14);
}

TEST_CASE("matmul skips zeros without changing the result") {
    Matrix a{{0, 2}, {0, 0}};
    Matrix b{{1, 1}, {3, 4}};
    CHECK(matmul(a, b) == Matrix{{6, 8}, {0, 0}});
}

TEST_CASE("matmul is associative") {
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t p = 1 + rng.below(7), q = 1 + rng.below(7), r = 1 + rng.below(7), s = 1 + rng.below(7);
        const Matrix a = random_matrix(p, q, rng), b = random_matrix(q, r, rng), c = random_matrix(r, s, rng);
        CHECK(max_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-9);
    }
}

TEST_CASE("elementwise helpers") {
    const Matrix a{{1, -2}, {3, 4}};
    const Matrix b{{0.5, 0.5}, {-1, 2}};
    CHECK(add(a, b) == Matrix{{1.5, -1.5}, {2, 6}});
    CHECK(subtract(a, b) == Matrix{{0.5, -2.5}, {4, 2}});
    CHECK(scale(a, -2) == Matrix{{-2, 4}, {-6, -8}});
    CHECK(transpose(a) == Matrix{{1, 3}, {-2, 4}});
    CHECK(column_sums(a) == Matrix{{4, 2}});
    CHECK(max_abs(a) == 4);
    CHECK(max_abs_diff(a, b) == 4.0);
    CHECK_THROWS_AS(add(a, Matrix(2, 3)), ShapeError);
}

TEST_CASE("matrix construction rejects bad input") {
    CHECK_THROWS_AS(Matrix(0, 3), ShapeError);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1, std::nan("")}), NumericError);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
}

TEST_CASE("frobenius_norm_sq") {
    CHECK(frobenius_norm_sq(Matrix::identity(3)) == 3.0);
    CHECK(frobenius_norm_sq(Matrix{{3, 0}, {0, 3}}) == 18.0);
    CHECK(frobenius_norm_sq(Matrix(2, 2)) == 0.0);
    Rng rng(3);
    const Matrix m = random_matrix(5, 4, rng);
    double ref = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) ref += m(i, j) * m(i, j);
    CHECK(frobenius_norm_sq(m) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("trace") {
    CHECK(trace(Matrix::identity(7)) == 7.0);
    CHECK(trace(Matrix{{1, 9}, {9, 4}}) == 5.0);
    CHECK_THROWS_AS(trace(Matrix(2, 3)), ShapeError);
    Rng rng(5);
    const Matrix m = random_matrix(6, 6, rng);
    double ref = 0.0;
    for (std::size_t i = 0; i < 6; ++i) ref += m(i, i);
    CHECK(trace(m) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("frobenius norm equals trace of the Gram matrix") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix m = random_matrix(1 + rng.below(12), 1 + rng.below(12), rng, -5, 5);
        CHECK(std::abs(frobenius_norm_sq(m) - trace(matmul_tn(m, m))) < 1e-9);
    }
}

TEST_CASE("qr on orthonormal inputs") {
    const auto i3 = qr_decompose(Matrix::identity(3));
    CHECK(i3.q == Matrix::identity(3));
    CHECK(i3.r == Matrix::identity(3));

    const auto swap = qr_decompose(Matrix{{0, 1}, {1, 0}});
    CHECK(max_diff(swap.q, Matrix{{0, 1}, {1, 0}}) < 1e-15);
    CHECK(max_diff(swap.r, Matrix::identity(2)) < 1e-15);
}

TEST_CASE("qr matches hand Gram-Schmidt") {
    const Matrix w{{1, 1}, {1, 0}, {0, 1}};
    const auto qr = qr_decompose(w);
    const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
    const Matrix q{{1 / s2, 1 / s6}, {1 / s2, -1 / s6}, {0, 2 / s6}};
    const Matrix r{{s2, 1 / s2}, {0, s6 / 2}};
    CHECK(max_diff(qr.q, q) < 1e-12);
    CHECK(max_diff(qr.r, r) < 1e-12);
    CHECK(max_diff(matmul_tn(qr.q, qr.q), Matrix::identity(2)) < 1e-10);
    CHECK(max_diff(matmul(qr.q, qr.r), w) < 1e-10);
}

TEST_CASE("qr contract on random full-rank matrices") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(10);
        const std::size_t m = n + rng.below(10);
        const Matrix w = random_matrix(m, n, rng);
        const auto qr = qr_decompose(w);
        REQUIRE(qr.q.rows() == m);
        REQUIRE(qr.r.rows() == n);
        CHECK(max_diff(matmul_tn(qr.q, qr.q), Matrix::identity(n)) < 1e-10);
        CHECK(max_diff(matmul(qr.q, qr.r), w) < 1e-10);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(qr.r(i, i) >= 0.0);
            for (std::size_t j = 0; j < i; ++j) CHECK(qr.r(i, j) == 0.0);
        }
        const auto again = qr_decompose(w);
        CHECK(again.q == qr.q);
    }
}

TEST_CASE("qr errors") {
    CHECK_THROWS_AS(qr_decompose(Matrix(2, 3)), ShapeError);
    const Matrix dependent{{1, 2, 1}, {2, 4, 0}, {3, 6, 1}};
    try {
        qr_decompose(dependent);
        FAIL("expected a singularity error");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("semi_orthogonal_init") {
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
        const Matrix w = semi_orthogonal_init(10, 10, seed);
        CHECK(max_diff(matmul_tn(w, w), Matrix::identity(10)) < 1e-10);
        CHECK(separability_metric(w) < 1e-12);
    }
    const Matrix col = semi_orthogonal_init(5, 1, 3);
    CHECK(std::abs(frobenius_norm_sq(col) - 1.0) < 1e-14);

    const Matrix a = semi_orthogonal_init(8, 3, 7);
    const Matrix b = semi_orthogonal_init(8, 3, 7);
    CHECK(separability_metric(a) < 1e-12);
    CHECK(a == b);
    CHECK_FALSE(a == semi_orthogonal_init(8, 3, 8));
    CHECK_THROWS_AS(semi_orthogonal_init(2, 3, 1), ShapeError);
}

namespace {

// Covariance by explicit loops, then power iteration with deflation.
std::vector<double> oracle_top_eigenvalues(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(n);
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            cov(a, b) = s / static_cast<double>(n - 1);
        }
    std::vector<double> out;
    for (std::size_t e = 0; e < k; ++e) {
        std::vector<double> v(d, 1.0), w(d);
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            for (std::size_t a = 0; a < d; ++a) {
                w[a] = 0.0;
                for (std::size_t b = 0; b < d; ++b) w[a] += cov(a, b) * v[b];
            }
            double norm = 0.0;
            for (double t : w) norm += t * t;
            norm = std::sqrt(norm);
            for (std::size_t a = 0; a < d; ++a) v[a] = w[a] / norm;
            lambda = norm;
        }
        out.push_back(lambda);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) cov(a, b) -= lambda * v[a] * v[b];
    }
    return out;
}

double pairwise_distance(const Matrix& m, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += (m(i, c) - m(j, c)) * (m(i, c) - m(j, c));
    return std::sqrt(s);
}

} // namespace

TEST_CASE("symmetric_eigen reconstructs its input") {
    Rng rng(10);
    const Matrix a = random_matrix(6, 6, rng);
    const Matrix s = add(a, transpose(a));
    const auto eig = symmetric_eigen(s);
    Matrix lambda(6, 6);
    for (std::size_t i = 0; i < 6; ++i) lambda(i, i) = eig.values[i];
    CHECK(max_diff(matmul(matmul(eig.vectors, lambda), transpose(eig.vectors)), s) < 1e-10);
    CHECK(max_diff(matmul_tn(eig.vectors, eig.vectors), Matrix::identity(6)) < 1e-10);
    for (std::size_t i = 1; i < 6; ++i) CHECK(eig.values[i - 1] >= eig.values[i]);
}

TEST_CASE("pca lossless when the data spans k dimensions") {
    Rng rng(11);
    const Matrix x = random_matrix(20, 3, rng, -4, 4);
    const auto pca = pca_fit(x, 3);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = i + 1; j < 20; ++j)
            CHECK(std::abs(pairwise_distance(x, i, j) - pairwise_distance(pca.projected, i, j)) < 1e-8);
    CHECK(max_diff(matmul_tn(pca.components, pca.components), Matrix::identity(3)) < 1e-10);

    // Planar data embedded in 5-D keeps distances with k = 2.
    const Matrix basis = semi_orthogonal_init(5, 2, 4);
    const Matrix coords = random_matrix(15, 2, rng);
    const Matrix embedded = matmul_nt(coords, basis);
    const Matrix proj = pca_reduce(embedded, 2);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = i + 1; j < 15; ++j)
            CHECK(std::abs(pairwise_distance(embedded, i, j) - pairwise_distance(proj, i, j)) < 1e-8);
}

TEST_CASE("pca on the line y = x") {
    const Matrix x{{0, 0}, {1, 1}, {2, 2}, {-3, -3}};
    const auto pca = pca_fit(x, 1);
    const double c = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(pca.components(0, 0)) - c) < 1e-12);
    CHECK(std::abs(pca.components(0, 0) - pca.components(1, 0)) < 1e-12);
}

TEST_CASE("pca variances match a power-iteration covariance oracle") {
    Rng rng(12);
    Matrix x = random_matrix(50, 10, rng);
    // Distinct feature scales keep the spectrum well separated for the oracle.
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 10; ++j) x(i, j) *= static_cast<double>(10 - j);
    const auto pca = pca_fit(x, 3);
    const auto ref = oracle_top_eigenvalues(x, 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(pca.variances[k] - ref[k]) < 1e-6);
    for (std::size_t k = 1; k < 3; ++k) CHECK(pca.variances[k - 1] >= pca.variances[k]);
    // Variance of each projected column equals its eigenvalue.
    for (std::size_t k = 0; k < 3; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < 50; ++i) s += pca.projected(i, k) * pca.projected(i, k);
        CHECK(std::abs(s / 49.0 - pca.variances[k]) < 1e-9);
    }
}

TEST_CASE("pca is translation invariant") {
    Rng rng(13);
    const Matrix x = random_matrix(30, 6, rng);
    Matrix shifted = x;
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 6; ++j) shifted(i, j) += 3.0 * static_cast<double>(j) - 7.5;
    CHECK(max_diff(pca_reduce(x, 3), pca_reduce(shifted, 3)) < 1e-9);
}

TEST_CASE("pca errors") {
    CHECK_THROWS_AS(pca_reduce(Matrix(5, 2), 3), ShapeError);
    CHECK_THROWS_AS(pca_reduce(Matrix(5, 2), 0), ShapeError);
    CHECK_THROWS_AS(pca_reduce(Matrix(1, 2), 1), ShapeError);
}
