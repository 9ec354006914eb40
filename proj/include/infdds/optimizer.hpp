#pragma once

#include <span>
#include <string>
#include <vector>

#include "infdds/matrix.hpp"

namespace infdds {

enum class OptKind { SgdMomentum, Adam };

/// Linear warmup to base_lr over warmup_steps, then linear decay to zero at
/// decay_horizon. warmup_steps == 0 skips warmup; decay_horizon <= warmup
/// holds base_lr flat.
struct LrSchedule {
    double base_lr = 0.05;
    long warmup_steps = 0;
    long decay_horizon = 0;

    double at(long step) const;
};

struct OptimizerState {
    OptKind kind = OptKind::Adam;
    long step_count = 0;
    LrSchedule lr;

    double momentum = 0.0;  // SGD only
    double beta1 = 0.9;     // Adam
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<Matrix> moment1;
    std::vector<Matrix> moment2;  // Adam only

    static OptimizerState sgd(LrSchedule sched, double momentum,
                              std::span<const Matrix> params);
    static OptimizerState adam(LrSchedule sched, double beta1, double beta2, double eps,
                               std::span<const Matrix> params);

    double current_lr() const { return lr.at(step_count); }
};

// One optimizer step in place. Returns the effective learning rate used.
// Rejects shape mismatches and non-finite gradients, naming the offending
// tensor in the diagnostic.
double optimizer_step(std::span<Matrix> params, std::span<const Matrix> grads,
                      OptimizerState& state,
                      std::span<const std::string> names = {});

// Advances moments and step_count as if pseudo_grad had been observed,
// without touching any parameters. Used after the Reptile model update so
// the optimizer state stays in sync with the parameters it tracks.
void optimizer_state_update(OptimizerState& state, std::span<const Matrix> pseudo_grad);

}  // namespace infdds
