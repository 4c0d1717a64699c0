#include "sepnet/losses.hpp"

#include "sepnet/error.hpp"
#include "sepnet/kernels.hpp"
#include "sepnet/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace sepnet {

namespace {

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t n_classes, const char* op) {
    if (labels.size() != rows)
        throw ShapeError(std::string(op) + ": " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
    for (std::size_t b = 0; b < labels.size(); ++b)
        if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= n_classes)
            throw DataError(std::string(op) + ": label " + std::to_string(labels[b]) + " at row " +
                            std::to_string(b) + " outside [0, " + std::to_string(n_classes) + ")");
}

} // namespace

std::vector<double> log_softmax(std::span<const double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    const double lse = mx + std::log(sum);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
    return out;
}

std::vector<double> softmax(std::span<const double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    check_labels(labels, logits.rows(), logits.cols(), "softmax_cross_entropy");
    const std::size_t B = logits.rows();
    const double inv_b = 1.0 / static_cast<double>(B);
    Matrix grad(B, logits.cols());
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const auto logp = log_softmax(logits.row(b));
        const auto y = static_cast<std::size_t>(labels[b]);
        loss -= logp[y];
        auto g = grad.row(b);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(logp[i]) * inv_b;
        g[y] -= inv_b;
    }
    return {loss * inv_b, std::move(grad)};
}

CenterState CenterState::zeros(std::size_t n_classes, std::size_t m, double update_rate) {
    if (!(update_rate > 0.0 && update_rate <= 1.0))
        throw ConfigError("center update rate must lie in (0, 1], got " + std::to_string(update_rate));
    return {Matrix(n_classes, m), update_rate};
}

CenterLossResult center_loss(const Matrix& latent, std::span<const int> labels, const CenterState& state) {
    check_labels(labels, latent.rows(), state.centers.rows(), "center_loss");
    if (state.centers.cols() != latent.cols())
        throw ShapeError("center_loss: centers " + state.centers.shape_string() + " vs latent " +
                         latent.shape_string());
    const std::size_t B = latent.rows();
    const std::size_t m = latent.cols();
    const double inv_b = 1.0 / static_cast<double>(B);

    Matrix grad(B, m);
    Matrix batch_sum(state.centers.rows(), m);
    std::vector<std::size_t> counts(state.centers.rows(), 0);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const auto y = static_cast<std::size_t>(labels[b]);
        const auto a = latent.row(b);
        const auto c = state.centers.row(y);
        auto g = grad.row(b);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = a[j] - c[j];
            loss += d * d;
            g[j] = d * inv_b;
        }
        kernels::active().axpy(1.0, a.data(), batch_sum.row(y).data(), m);
        ++counts[y];
    }

    CenterState next = state;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        const double inv_n = 1.0 / static_cast<double>(counts[k]);
        auto c = next.centers.row(k);
        const auto s = batch_sum.row(k);
        for (std::size_t j = 0; j < m; ++j) c[j] += state.update_rate * (s[j] * inv_n - c[j]);
    }
    return {0.5 * loss * inv_b, std::move(grad), std::move(next)};
}

Matrix one_hot(std::span<const int> labels, std::size_t n_classes) {
    check_labels(labels, labels.size(), n_classes, "one_hot");
    Matrix out(labels.size(), n_classes);
    for (std::size_t b = 0; b < labels.size(); ++b) out(b, static_cast<std::size_t>(labels[b])) = 1.0;
    return out;
}

ReconstructionResult reconstruction_loss(const Matrix& latent, const Matrix& onehot, const Matrix& w) {
    const std::size_t B = latent.rows();
    const std::size_t m = latent.cols();
    const std::size_t n = onehot.cols();
    if (onehot.rows() != B || w.rows() != m || w.cols() != n)
        throw ShapeError("reconstruction_loss: latent " + latent.shape_string() + ", labels " +
                         onehot.shape_string() + ", weight " + w.shape_string());
    for (std::size_t b = 0; b < B; ++b) {
        std::size_t ones = 0;
        for (double v : onehot.row(b)) {
            if (v == 1.0) ++ones;
            else if (v != 0.0) ones = 2;
        }
        if (ones != 1) throw DataError("reconstruction_loss: label row " + std::to_string(b) + " is not one-hot");
    }

    // â = ô Wᵀ, batch x m.
    const Matrix recon = matmul_nt(onehot, w);
    const double inv_b = 1.0 / static_cast<double>(B);
    Matrix latent_grad(B, m);
    Matrix recon_grad(B, m);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const auto logp = log_softmax(latent.row(b));
        const auto logq = log_softmax(recon.row(b));
        double kl = 0.0;
        std::vector<double> p(m), diff(m);
        for (std::size_t j = 0; j < m; ++j) {
            p[j] = std::exp(logp[j]);
            diff[j] = logp[j] - logq[j];
            kl += p[j] * diff[j];
        }
        loss += kl;
        auto ga = latent_grad.row(b);
        auto gr = recon_grad.row(b);
        for (std::size_t j = 0; j < m; ++j) {
            ga[j] = p[j] * (diff[j] - kl) * inv_b;
            gr[j] = (std::exp(logq[j]) - p[j]) * inv_b;
        }
    }
    // ∂â_j/∂W_{j,i} = ô_i, so ∂L/∂W = (∂L/∂â)ᵀ ô.
    Matrix w_grad = matmul_tn(recon_grad, onehot);
    return {loss * inv_b, std::move(latent_grad), std::move(w_grad)};
}

TotalLoss total_loss(double cls, const ClsGradients& cls_grads, double re, const ReGradients& re_grads,
                     double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative, got " + std::to_string(lambda));
    if (cls_grads.latent_grad.rows() != re_grads.latent_grad.rows() ||
        cls_grads.latent_grad.cols() != re_grads.latent_grad.cols())
        throw ShapeError("total_loss: latent seeds " + cls_grads.latent_grad.shape_string() + " and " +
                         re_grads.latent_grad.shape_string());
    LossValue value{cls, re, cls + lambda * re, lambda};
    MergedSeeds seeds{cls_grads.logit_grad, cls_grads.latent_grad, scale(re_grads.w_grad, lambda)};
    kernels::active().axpy(lambda, re_grads.latent_grad.data().data(), seeds.latent_grad.data().data(),
                           seeds.latent_grad.size());
    return {value, std::move(seeds)};
}

} // namespace sepnet
