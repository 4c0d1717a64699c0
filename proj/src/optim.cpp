#include "sepnet/optim.hpp"

#include "sepnet/error.hpp"
#include "sepnet/kernels.hpp"

namespace sepnet {

void LrSchedule::validate() const {
    if (!(base_lr >= 0.0)) throw ConfigError("base learning rate must be non-negative");
    if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("lr factor must lie in (0, 1)");
    for (std::size_t i = 1; i < milestones.size(); ++i)
        if (milestones[i] <= milestones[i - 1]) throw ConfigError("lr milestones must be strictly increasing");
}

double lr_at(const LrSchedule& schedule, int epoch) {
    double lr = schedule.base_lr;
    for (int m : schedule.milestones)
        if (m <= epoch) lr *= schedule.factor;
    return lr;
}

ParamMask freeze_mask(const Network& net, bool freeze_final) {
    ParamMask mask(net.params().size(), true);
    if (freeze_final) mask[net.final_weight_index()] = false;
    return mask;
}

SgdState SgdState::for_network(const Network& net, double momentum, double weight_decay) {
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
    SgdState s;
    s.momentum = momentum;
    s.weight_decay = weight_decay;
    for (std::size_t i = 0; i < net.params().size(); ++i) {
        s.velocity.emplace_back(net.params()[i].rows(), net.params()[i].cols());
        s.decay.push_back(!net.param_info(i).is_bias);
    }
    return s;
}

void sgd_step(std::span<Matrix> params, std::span<const Matrix> grads, SgdState& state, double lr,
              const ParamMask& mask) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.velocity.size() != n || state.decay.size() != n || mask.size() != n)
        throw ShapeError("sgd_step: " + std::to_string(n) + " parameters but " + std::to_string(grads.size()) +
                         " gradients, " + std::to_string(state.velocity.size()) + " velocities, " +
                         std::to_string(mask.size()) + " mask entries");
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < n; ++i) {
        if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols() ||
            state.velocity[i].rows() != params[i].rows() || state.velocity[i].cols() != params[i].cols())
            throw ShapeError("sgd_step: slot " + std::to_string(i) + " parameter " + params[i].shape_string() +
                             " vs gradient " + grads[i].shape_string());
        if (mask[i] && !k.all_finite(grads[i].data().data(), grads[i].size()))
            throw NumericError("sgd_step: non-finite gradient in parameter slot " + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        k.sgd_update(params[i].data().data(), grads[i].data().data(), state.velocity[i].data().data(),
                     params[i].size(), lr, state.momentum, state.decay[i] ? state.weight_decay : 0.0);
    }
}

} // namespace sepnet
