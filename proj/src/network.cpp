#include "sepnet/network.hpp"

#include "sepnet/error.hpp"
#include "sepnet/kernels.hpp"
#include "sepnet/linalg.hpp"
#include "sepnet/rng.hpp"

#include <cmath>
#include <sstream>

namespace sepnet {

NetworkSpec NetworkSpec::mlp(std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
    NetworkSpec spec;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const bool last = i + 2 == widths.size();
        spec.layers.push_back({widths[i], widths[i + 1], last ? Activation::identity : Activation::relu});
    }
    spec.validate();
    return spec;
}

NetworkSpec NetworkSpec::parse(const std::string& text) {
    std::vector<std::size_t> widths;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '-')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(part, &used);
            if (used != part.size() || v <= 0) throw std::invalid_argument(part);
            widths.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("bad layer width '" + part + "' in '" + text + "'");
        }
    }
    return mlp(widths);
}

std::string NetworkSpec::to_string() const {
    std::string out = std::to_string(layers.front().in_dim);
    for (const auto& l : layers) out += "-" + std::to_string(l.out_dim);
    return out;
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ConfigError("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].in_dim == 0 || layers[i].out_dim == 0)
            throw ConfigError("layer " + std::to_string(i) + " has a zero dimension");
        if (i + 1 < layers.size() && layers[i].out_dim != layers[i + 1].in_dim)
            throw ConfigError("layer " + std::to_string(i) + " output " +
                              std::to_string(layers[i].out_dim) + " does not feed layer " +
                              std::to_string(i + 1) + " input " + std::to_string(layers[i + 1].in_dim));
    }
    if (layers.back().activation != Activation::identity)
        throw ConfigError("decision layer must be identity-activated");
}

Network::Network(NetworkSpec spec, std::vector<Matrix> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    const std::size_t L = spec_.layers.size();
    std::size_t slot = 0;
    for (std::size_t l = 0; l < L; ++l) {
        weight_slot_.push_back(slot);
        info_.push_back({l, false});
        ++slot;
        if (l + 1 < L) {
            bias_slot_.push_back(slot);
            info_.push_back({l, true});
            ++slot;
        }
    }
    if (params_.size() != slot)
        throw ShapeError("network " + spec_.to_string() + " expects " + std::to_string(slot) +
                         " parameter tensors, got " + std::to_string(params_.size()));
    for (std::size_t l = 0; l < L; ++l) {
        const auto& ls = spec_.layers[l];
        const Matrix& w = params_[weight_slot_[l]];
        if (w.rows() != ls.in_dim || w.cols() != ls.out_dim)
            throw ShapeError("layer " + std::to_string(l) + " weight is " + w.shape_string() +
                             ", expected " + std::to_string(ls.in_dim) + "x" + std::to_string(ls.out_dim));
        if (l + 1 < L) {
            const Matrix& b = params_[bias_slot_[l]];
            if (b.rows() != 1 || b.cols() != ls.out_dim)
                throw ShapeError("layer " + std::to_string(l) + " bias is " + b.shape_string() +
                                 ", expected 1x" + std::to_string(ls.out_dim));
        }
    }
}

Network Network::initialize(NetworkSpec spec, std::uint64_t seed) {
    spec.validate();
    Rng root(seed);
    std::vector<Matrix> params;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& ls = spec.layers[l];
        Rng rng = root.split(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(ls.in_dim));
        Matrix w(ls.in_dim, ls.out_dim);
        for (double& v : w.data()) v = rng.uniform(-bound, bound);
        params.push_back(std::move(w));
        if (l + 1 < spec.layers.size()) params.emplace_back(1, ls.out_dim);
    }
    return Network(std::move(spec), std::move(params));
}

Network Network::from_params(NetworkSpec spec, std::vector<Matrix> params) {
    spec.validate();
    return Network(std::move(spec), std::move(params));
}

const Matrix& Network::bias(std::size_t layer) const {
    if (layer >= bias_slot_.size())
        throw ShapeError("layer " + std::to_string(layer) + " has no bias");
    return params_[bias_slot_[layer]];
}

ForwardTrace forward(const Network& net, const Matrix& batch) {
    const auto& layers = net.spec().layers;
    if (batch.cols() != layers.front().in_dim)
        throw ShapeError("forward: batch width " + std::to_string(batch.cols()) +
                         " does not match network input " + std::to_string(layers.front().in_dim));
    ForwardTrace trace;
    trace.activations.reserve(layers.size() + 1);
    trace.pre_activations.reserve(layers.size());
    trace.activations.push_back(batch);
    const auto& k = kernels::active();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = matmul(trace.activations.back(), net.weight(l));
        if (l + 1 < layers.size()) {
            const Matrix& b = net.bias(l);
            for (std::size_t i = 0; i < z.rows(); ++i) k.axpy(1.0, b.data().data(), z.row(i).data(), z.cols());
        }
        Matrix a = z;
        if (layers[l].activation == Activation::relu)
            for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
        trace.pre_activations.push_back(std::move(z));
        trace.activations.push_back(std::move(a));
    }
    return trace;
}

GradientSet zero_gradients(const Network& net) {
    GradientSet g;
    for (const auto& p : net.params()) g.grads.emplace_back(p.rows(), p.cols());
    return g;
}

GradientSet backward(const Network& net, const ForwardTrace& trace, const Matrix& logit_grad,
                     const Matrix& latent_grad_extra) {
    const auto& layers = net.spec().layers;
    const std::size_t L = layers.size();
    const std::size_t batch = trace.input().rows();
    if (logit_grad.rows() != batch || logit_grad.cols() != net.spec().class_count())
        throw ShapeError("backward: logit seed " + logit_grad.shape_string() + ", expected " +
                         trace.logits().shape_string());
    if (latent_grad_extra.rows() != batch || latent_grad_extra.cols() != net.spec().latent_dim())
        throw ShapeError("backward: latent seed " + latent_grad_extra.shape_string() + ", expected " +
                         trace.latent().shape_string());

    GradientSet g = zero_gradients(net);
    const std::size_t last = L - 1;
    g.grads[net.weight_index(last)] = matmul_tn(trace.latent(), logit_grad);
    if (L == 1) return g;

    Matrix upstream = add(matmul_nt(logit_grad, net.weight(last)), latent_grad_extra);
    for (std::size_t l = last; l-- > 0;) {
        Matrix delta = std::move(upstream);
        if (layers[l].activation == Activation::relu) {
            auto d = delta.data();
            auto z = trace.pre_activations[l].data();
            for (std::size_t i = 0; i < d.size(); ++i)
                if (!(z[i] > 0.0)) d[i] = 0.0;
        }
        g.grads[net.weight_index(l)] = matmul_tn(trace.activations[l], delta);
        g.grads[net.weight_index(l) + 1] = column_sums(delta);
        if (l > 0) upstream = matmul_nt(delta, net.weight(l));
        else break;
    }
    return g;
}

std::size_t decide_class(std::span<const double> latent, const Matrix& w) {
    if (latent.size() != w.rows())
        throw ShapeError("decide_class: latent length " + std::to_string(latent.size()) +
                         " does not match weight rows " + std::to_string(w.rows()));
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < w.cols(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.rows(); ++j) s += latent[j] * w(j, i);
        if (i == 0 || s > best_score) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

std::vector<int> predict(const Network& net, const Matrix& batch) {
    const ForwardTrace trace = forward(net, batch);
    const Matrix& o = trace.logits();
    std::vector<int> out(o.rows());
    for (std::size_t b = 0; b < o.rows(); ++b) {
        const auto row = o.row(b);
        std::size_t best = 0;
        for (std::size_t i = 1; i < row.size(); ++i)
            if (row[i] > row[best]) best = i;
        out[b] = static_cast<int>(best);
    }
    return out;
}

} // namespace sepnet
