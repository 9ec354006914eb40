#pragma once

#include <map>
#include <span>
#include <vector>

#include "infdds/rng.hpp"

namespace infdds {

enum class ScorerMode { ConditionalLogProb, FullLogProb };

/// The parameterized sampling policy over training datasets: logits psi plus
/// the scorer's update bookkeeping. P(i) = exp(psi_i) / sum_k exp(psi_k).
struct SamplerState {
    std::vector<double> psi;
    double scorer_lr = 0.1;
    long warmup_steps = 50;
    long update_every = 50;
    size_t subsample_size = 0;  // 0 means all datasets
    ScorerMode mode = ScorerMode::ConditionalLogProb;
    bool center_rewards = false;  // subtract the subsample mean from rewards
    bool ascend = true;           // positive influence upweights its dataset

    size_t num_datasets() const { return psi.size(); }
};

// Softmax with max-subtraction; sums to 1 within 1e-12.
std::vector<double> probabilities(const SamplerState& state);

// psi_i = ln(size_i) / tau up to a shared constant. tau = +inf gives the
// uniform distribution, tau = 1 size-proportional.
SamplerState init_from_temperature(std::span<const size_t> sizes, double tau);

// psi_i = ln(weight_i + floor); recovers the normalized weights.
SamplerState init_from_weights(std::span<const double> weights);

// P(i | S): the policy renormalized over subsample S; zero off S.
std::map<int, double> conditional_probabilities(const SamplerState& state,
                                                std::span<const int> subsample);

// Inverse-CDF draw from probabilities(state) using one uniform.
int sample_dataset(const SamplerState& state, Rng& rng);

// REINFORCE ascent on psi:
//   d_psi = sum_{i in S} P(i) * I_i * grad_psi log P(i | S)   (conditional mode)
//   d_psi = sum_{i in S} P(i) * I_i * grad_psi log P(i)       (full mode)
// The leading weight is the full-distribution P(i) in both modes.
SamplerState reinforce_update(const SamplerState& state, std::span<const int> subsample,
                              const std::map<int, double>& influences);

// The raw scorer gradient (exposed for tests and diagnostics).
std::vector<double> scorer_gradient(const SamplerState& state, std::span<const int> subsample,
                                    const std::map<int, double>& influences);

// Uniform subsample of k dataset indices, without replacement, ascending.
std::vector<int> draw_subsample(size_t num_datasets, size_t k, Rng& rng);

}  // namespace infdds
