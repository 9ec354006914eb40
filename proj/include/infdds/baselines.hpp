#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "infdds/matrix.hpp"

namespace infdds {

enum class Strategy { StaticTau, Cooldown, InfDds, GradAlign };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct CooldownParams {
    double tau_start = 5.0;
    double tau_end = std::numeric_limits<double>::infinity();
    double switch_fraction = 0.5;
};

// Temperature anneals over the first switch_fraction of training, then holds
// tau_end. Interpolation is linear in the exponent 1/tau so tau_end = inf
// (uniform) is reachable; probabilities follow the |size|^{1/tau} rule.
std::vector<double> cooldown_schedule(long step, long total_steps, double tau_start,
                                      double tau_end, double switch_fraction,
                                      std::span<const size_t> sizes);

// Cosine alignment between flattened train and dev gradients, in [-1, 1].
// Zero-norm input yields 0. Substituted for the influence score when the
// strategy is GradAlign.
double grad_alignment_reward(std::span<const Matrix> train_grads,
                             std::span<const Matrix> dev_grads);

// |size|^{1/tau} normalized (tau = inf gives uniform); shared by the static
// and cooldown strategies.
std::vector<double> temperature_distribution(std::span<const size_t> sizes, double tau);

}  // namespace infdds
