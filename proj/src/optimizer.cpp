#include "infdds/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace infdds {

namespace {

std::string tensor_name(std::span<const std::string> names, size_t i) {
    if (i < names.size()) return names[i];
    return "tensor " + std::to_string(i);
}

void check_inputs(std::span<Matrix> params, std::span<const Matrix> grads,
                  const OptimizerState& state, std::span<const std::string> names) {
    if (params.size() != grads.size())
        throw std::invalid_argument("optimizer_step: params/grads count mismatch");
    if (state.moment1.size() != params.size())
        throw std::invalid_argument("optimizer_step: state tracks a different parameter set");
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]))
            throw std::invalid_argument("optimizer_step: shape mismatch on " +
                                        tensor_name(names, i));
        if (!all_finite(grads[i]))
            throw std::runtime_error("optimizer_step: non-finite gradient in " +
                                     tensor_name(names, i));
    }
}

}  // namespace

double LrSchedule::at(long step) const {
    if (warmup_steps > 0 && step < warmup_steps) {
        return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
    }
    if (decay_horizon > warmup_steps) {
        const double remain = static_cast<double>(decay_horizon - step) /
                              static_cast<double>(decay_horizon - warmup_steps);
        return base_lr * std::max(0.0, remain);
    }
    return base_lr;
}

OptimizerState OptimizerState::sgd(LrSchedule sched, double momentum,
                                   std::span<const Matrix> params) {
    OptimizerState st;
    st.kind = OptKind::SgdMomentum;
    st.lr = sched;
    st.momentum = momentum;
    for (const auto& p : params) st.moment1.emplace_back(p.rows, p.cols);
    return st;
}

OptimizerState OptimizerState::adam(LrSchedule sched, double beta1, double beta2, double eps,
                                    std::span<const Matrix> params) {
    OptimizerState st;
    st.kind = OptKind::Adam;
    st.lr = sched;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.eps = eps;
    for (const auto& p : params) {
        st.moment1.emplace_back(p.rows, p.cols);
        st.moment2.emplace_back(p.rows, p.cols);
    }
    return st;
}

double optimizer_step(std::span<Matrix> params, std::span<const Matrix> grads,
                      OptimizerState& state, std::span<const std::string> names) {
    check_inputs(params, grads, state, names);
    const double eta = state.lr.at(state.step_count);

    if (state.kind == OptKind::SgdMomentum) {
        for (size_t i = 0; i < params.size(); ++i) {
            if (state.momentum != 0.0) {
                Matrix& v = state.moment1[i];
                for (size_t n = 0; n < v.data.size(); ++n)
                    v.data[n] = state.momentum * v.data[n] + grads[i].data[n];
                add_scaled(params[i], v, -eta);
            } else {
                add_scaled(params[i], grads[i], -eta);
            }
        }
    } else {
        const long t = state.step_count + 1;
        const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            Matrix& m = state.moment1[i];
            Matrix& v = state.moment2[i];
            const Matrix& g = grads[i];
            Matrix& p = params[i];
            for (size_t n = 0; n < p.data.size(); ++n) {
                m.data[n] = state.beta1 * m.data[n] + (1.0 - state.beta1) * g.data[n];
                v.data[n] = state.beta2 * v.data[n] + (1.0 - state.beta2) * g.data[n] * g.data[n];
                const double mhat = m.data[n] / bc1;
                const double vhat = v.data[n] / bc2;
                p.data[n] -= eta * mhat / (std::sqrt(vhat) + state.eps);
            }
        }
    }

    ++state.step_count;
    for (size_t i = 0; i < params.size(); ++i) require_finite(params[i], tensor_name(names, i));
    return eta;
}

void optimizer_state_update(OptimizerState& state, std::span<const Matrix> pseudo_grad) {
    if (state.moment1.size() != pseudo_grad.size())
        throw std::invalid_argument("optimizer_state_update: parameter set mismatch");
    for (size_t i = 0; i < pseudo_grad.size(); ++i) {
        if (!state.moment1[i].same_shape(pseudo_grad[i]))
            throw std::invalid_argument("optimizer_state_update: shape mismatch on tensor " +
                                        std::to_string(i));
    }

    if (state.kind == OptKind::SgdMomentum) {
        // momentum == 0 keeps no gradient state; only the step count moves
        if (state.momentum != 0.0) {
            for (size_t i = 0; i < pseudo_grad.size(); ++i) {
                Matrix& v = state.moment1[i];
                for (size_t n = 0; n < v.data.size(); ++n)
                    v.data[n] = state.momentum * v.data[n] + pseudo_grad[i].data[n];
            }
        }
    } else {
        for (size_t i = 0; i < pseudo_grad.size(); ++i) {
            Matrix& m = state.moment1[i];
            Matrix& v = state.moment2[i];
            const Matrix& g = pseudo_grad[i];
            for (size_t n = 0; n < m.data.size(); ++n) {
                m.data[n] = state.beta1 * m.data[n] + (1.0 - state.beta1) * g.data[n];
                v.data[n] = state.beta2 * v.data[n] + (1.0 - state.beta2) * g.data[n] * g.data[n];
            }
        }
    }
    ++state.step_count;
}

}  // namespace infdds
