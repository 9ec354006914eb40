#pragma once

#include <limits>
#include <span>
#include <vector>

#include "infdds/baselines.hpp"
#include "infdds/corpus.hpp"
#include "infdds/influence.hpp"
#include "infdds/optimizer.hpp"
#include "infdds/retriever.hpp"
#include "infdds/sampler.hpp"
#include "infdds/trajectory.hpp"

namespace infdds {

enum class ReptileWeighting { SoftmaxTau, RewardNormalized };

struct ModelConfig {
    size_t vocab_buckets = 1024;
    size_t d = 16;
    size_t d_out = 16;
    double t_sim = 0.02;
};

struct OptimConfig {
    OptKind kind = OptKind::Adam;
    double base_lr = 0.02;
    long warmup_steps = 20;
    long decay_horizon = 0;  // 0 = no decay
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct SamplerConfig {
    std::string init = "temperature";  // temperature | weights
    double tau = std::numeric_limits<double>::infinity();
    std::vector<double> weights;  // used when init = weights
    double scorer_lr = 0.1;
    ScorerMode mode = ScorerMode::ConditionalLogProb;
    bool center_rewards = false;
    bool ascend = true;
};

struct MetaConfig {
    long warmup_steps = 50;   // no scorer activity before this many ordinary steps
    long update_every = 50;   // meta-round cadence in ordinary steps
    int l = 3;                // proxy update steps; 0 disables meta-rounds entirely
    size_t subsample_size = 0;  // |S|; 0 = all datasets
    ReptileWeighting weighting = ReptileWeighting::SoftmaxTau;
    double reptile_tau = 0.0;  // softmax temperature; 0 = std of the round's influences
    bool reptile_enabled = true;
    InfluenceMetric metric = InfluenceMetric::NegInfoNce;
    size_t dev_batch_size = 64;
    bool per_step_accumulation = false;
    bool interleave_ordinary = true;  // ordinary sampled steps between meta-rounds
};

struct TrainConfig {
    long total_steps = 600;
    size_t batch_size = 16;
    long eval_every = 50;
    uint64_t seed = 1;
    Strategy strategy = Strategy::InfDds;
    CooldownParams cooldown;
    ModelConfig model;
    OptimConfig optim;
    SamplerConfig sampler;
    MetaConfig meta;
};

struct ReptileWeights {
    std::vector<double> p;
    bool valid = false;
};

// Softmax mode: p = softmax(I / tau_r), always a distribution.
// Reward-normalized mode: p_i = I_i / sum(I); entries may be negative and
// the result is invalid when |sum(I)| falls below 1e-12.
ReptileWeights reptile_weights(std::span<const double> influences, ReptileWeighting weighting,
                               double tau_r);

// params += alpha * sum_i p[i] * displacements[i]; returns the applied update.
std::vector<Matrix> weighted_reptile_update(std::span<Matrix> params,
                                            std::span<const std::vector<Matrix>> displacements,
                                            std::span<const double> p, double alpha);

struct MetaRoundResult {
    InfluenceReport report;
    std::vector<int> subsample;
    std::vector<double> reptile_p;  // aligned with subsample; empty when not applied
    bool reptile_applied = false;
    double applied_update_norm = 0.0;
    double reward_std = 0.0;
    std::vector<double> psi_before;
    std::vector<double> psi_after;
};

// rng streams consumed inside meta_round (exposed so tests can reproduce them)
Rng meta_subsample_stream(const Rng& round_rng);
Rng meta_influence_stream(const Rng& round_rng);

// One full meta-round: subsample S, influence round, weighted Reptile model
// update at alpha = current eta_t, optimizer state update with the pseudo
// gradient of the applied update, then the REINFORCE scorer update.
MetaRoundResult meta_round(ModelParams& params, OptimizerState& opt, SamplerState& sampler,
                           const Corpus& corpus, const TrainConfig& config, long step,
                           const Rng& round_rng);

struct RoundStat {
    long step = 0;
    double reward_std = 0.0;
    double applied_update_norm = 0.0;
};

struct TrainResult {
    ModelParams params;        // checkpoint with the best dev metric
    ModelParams final_params;  // parameters after the last step
    SamplerState sampler;
    TrajectoryLog log;
    double best_dev_metric = 0.0;
    long best_step = -1;
    double final_dev_metric = 0.0;
    long meta_rounds = 0;
    std::vector<RoundStat> round_stats;
};

// The full training loop: ordinary sampled steps interleaved with meta-rounds
// every update_every steps after warmup, dev evaluation at eval cadence,
// trajectory logging, and best-checkpoint selection on the dev metric.
TrainResult train(const Corpus& corpus, const TrainConfig& config);

}  // namespace infdds
