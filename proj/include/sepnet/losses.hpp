#pragma once

#include "sepnet/matrix.hpp"

#include <span>
#include <vector>

namespace sepnet {

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> v);
std::vector<double> log_softmax(std::span<const double> v);

struct SoftmaxCeResult {
    double loss;
    Matrix logit_grad; // (softmax - onehot) / B
};

/// Mean over the batch of -log softmax(logits)_y.
SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

struct CenterState {
    Matrix centers;           // n_classes x m
    double update_rate = 0.5; // in (0, 1]

    static CenterState zeros(std::size_t n_classes, std::size_t m, double update_rate = 0.5);
};

struct CenterLossResult {
    double loss;          // (1 / 2B) Σ ‖α_b - c_{y_b}‖²
    Matrix latent_grad;   // (α_b - c_{y_b}) / B
    CenterState updated;  // each seen class center moved toward its batch mean
};

CenterLossResult center_loss(const Matrix& latent, std::span<const int> labels, const CenterState& state);

struct ReconstructionResult {
    double loss;        // mean over batch of KL(softmax(α) ‖ softmax(ô Wᵀ))
    Matrix latent_grad; // B x m
    Matrix w_grad;      // m x n
};

/// Feed-backward reconstruction loss. The label row ô is mapped back into
/// latent space through the shared decision weight, â = ô Wᵀ, and compared
/// with α as distributions over the m feature components.
ReconstructionResult reconstruction_loss(const Matrix& latent, const Matrix& onehot, const Matrix& w);

Matrix one_hot(std::span<const int> labels, std::size_t n_classes);

struct LossValue {
    double cls = 0.0;
    double re = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

/// Gradient seeds produced by a classification objective.
struct ClsGradients {
    Matrix logit_grad;
    Matrix latent_grad; // zero unless an auxiliary latent term (center loss) is active
};

struct ReGradients {
    Matrix latent_grad;
    Matrix w_grad;
};

/// Seeds for Network backward plus the direct decision-weight term.
struct MergedSeeds {
    Matrix logit_grad;
    Matrix latent_grad;
    Matrix w_grad;
};

struct TotalLoss {
    LossValue value;
    MergedSeeds seeds;
};

/// L_total = L_cls + λ L_re with the re-path seeds scaled by λ.
TotalLoss total_loss(double cls, const ClsGradients& cls_grads, double re, const ReGradients& re_grads,
                     double lambda);

} // namespace sepnet
