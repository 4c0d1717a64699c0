#pragma once

#include "sepnet/matrix.hpp"
#include "sepnet/network.hpp"

#include <span>
#include <vector>

namespace sepnet {

/// Step schedule: base_lr * factor^(number of milestones <= epoch).
struct LrSchedule {
    double base_lr = 0.1;
    std::vector<int> milestones;
    double factor = 0.1;

    void validate() const;
};

double lr_at(const LrSchedule& schedule, int epoch);

/// Per-slot update flags; false leaves the parameter and its velocity untouched.
using ParamMask = std::vector<bool>;

ParamMask freeze_mask(const Network& net, bool freeze_final);

struct SgdState {
    std::vector<Matrix> velocity;
    std::vector<bool> decay; // weight decay applies to this slot
    double momentum = 0.9;
    double weight_decay = 1e-4;

    /// Zero velocity; weight decay on weights only, never on biases.
    static SgdState for_network(const Network& net, double momentum, double weight_decay);
};

/// Classical momentum SGD, in place:
///   g' = g + wd·p ;  v = μ·v + g' ;  p = p - lr·v
/// Throws NumericError on a non-finite gradient before touching anything.
void sgd_step(std::span<Matrix> params, std::span<const Matrix> grads, SgdState& state, double lr,
              const ParamMask& mask);

} // namespace sepnet
