#pragma once

#include "sepnet/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sepnet {

enum class Activation { relu, identity };

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::relu;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Ordered dense layers. The last layer is the identity-activated decision
/// layer whose m x n weight holds one column kernel per class.
struct NetworkSpec {
    std::vector<LayerSpec> layers;

    /// relu hidden layers and an identity output layer over the given widths,
    /// e.g. {784, 64, 10}.
    static NetworkSpec mlp(std::span<const std::size_t> widths);
    /// Parses "784-64-10".
    static NetworkSpec parse(const std::string& text);
    std::string to_string() const;

    void validate() const;

    std::size_t input_dim() const { return layers.front().in_dim; }
    std::size_t latent_dim() const { return layers.back().in_dim; }
    std::size_t class_count() const { return layers.back().out_dim; }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Parameter slot metadata; parameters are stored flat in layer order:
/// w0, b0, w1, b1, ..., w_last (the decision layer has no bias).
struct ParamInfo {
    std::size_t layer;
    bool is_bias;
};

class Network {
public:
    /// Weights uniform in ±1/sqrt(in_dim), hidden biases zero.
    static Network initialize(NetworkSpec spec, std::uint64_t seed);
    static Network from_params(NetworkSpec spec, std::vector<Matrix> params);

    const NetworkSpec& spec() const noexcept { return spec_; }

    std::vector<Matrix>& params() noexcept { return params_; }
    const std::vector<Matrix>& params() const noexcept { return params_; }
    ParamInfo param_info(std::size_t index) const { return info_.at(index); }

    const Matrix& weight(std::size_t layer) const { return params_[weight_index(layer)]; }
    Matrix& weight(std::size_t layer) { return params_[weight_index(layer)]; }
    const Matrix& bias(std::size_t layer) const;

    std::size_t weight_index(std::size_t layer) const { return weight_slot_.at(layer); }
    std::size_t final_weight_index() const { return weight_slot_.back(); }
    const Matrix& final_weight() const { return params_[final_weight_index()]; }
    Matrix& final_weight() { return params_[final_weight_index()]; }

private:
    Network(NetworkSpec spec, std::vector<Matrix> params);

    NetworkSpec spec_;
    std::vector<Matrix> params_;
    std::vector<ParamInfo> info_;
    std::vector<std::size_t> weight_slot_;
    std::vector<std::size_t> bias_slot_;
};

struct ForwardTrace {
    // activations[0] is the input batch; activations[l + 1] is layer l's output.
    std::vector<Matrix> activations;
    std::vector<Matrix> pre_activations;

    const Matrix& input() const { return activations.front(); }
    /// Penultimate activation α, batch x m.
    const Matrix& latent() const { return activations[activations.size() - 2]; }
    /// Decision outputs o = αW, batch x n.
    const Matrix& logits() const { return activations.back(); }
};

struct GradientSet {
    std::vector<Matrix> grads; // same slots as Network::params()
};

ForwardTrace forward(const Network& net, const Matrix& batch);

/// Gradients of a scalar loss whose partials w.r.t. the logits and the latent
/// features are the given seeds (both batch-shaped).
GradientSet backward(const Network& net, const ForwardTrace& trace, const Matrix& logit_grad,
                     const Matrix& latent_grad_extra);

GradientSet zero_gradients(const Network& net);

/// argmax_i α·w_i with ties going to the lowest index.
std::size_t decide_class(std::span<const double> latent, const Matrix& w);

std::vector<int> predict(const Network& net, const Matrix& batch);

} // namespace sepnet
