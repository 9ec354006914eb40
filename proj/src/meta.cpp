#include "infdds/meta.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace infdds {

namespace {

constexpr uint64_t kInitStream = 0x11;
constexpr uint64_t kTrainStream = 0x22;
constexpr uint64_t kRoundStreamBase = 0x4000;
constexpr uint64_t kSubsampleTag = 0x5;
constexpr uint64_t kInfluenceTag = 0x1;

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

SamplerState make_sampler(const Corpus& corpus, const TrainConfig& config) {
    const auto sizes = corpus.train_sizes();
    SamplerState st;
    if (config.sampler.init == "weights") {
        st = init_from_weights(config.sampler.weights);
        if (st.psi.size() != corpus.train.size())
            throw std::invalid_argument("sampler weights count does not match dataset count");
    } else {
        st = init_from_temperature(sizes, config.sampler.tau);
    }
    st.scorer_lr = config.sampler.scorer_lr;
    st.mode = config.sampler.mode;
    st.center_rewards = config.sampler.center_rewards;
    st.ascend = config.sampler.ascend;
    st.warmup_steps = config.meta.warmup_steps;
    st.update_every = config.meta.update_every;
    st.subsample_size =
        config.meta.subsample_size == 0 ? corpus.train.size() : config.meta.subsample_size;
    return st;
}

OptimizerState make_optimizer(const TrainConfig& config, std::span<const Matrix> params) {
    LrSchedule sched{config.optim.base_lr, config.optim.warmup_steps, config.optim.decay_horizon};
    if (config.optim.kind == OptKind::SgdMomentum)
        return OptimizerState::sgd(sched, config.optim.momentum, params);
    return OptimizerState::adam(sched, config.optim.beta1, config.optim.beta2, config.optim.eps,
                                params);
}

// mean NDCG@10 across all dev sets (full evaluation)
double dev_metric(const ModelParams& params, std::span<const DevSet> dev_sets) {
    double sum = 0.0;
    for (const auto& ds : dev_sets) sum += evaluate_retrieval(params, ds, 10).mean_ndcg;
    return sum / static_cast<double>(dev_sets.size());
}

// scorer round for the gradient-alignment baseline: cosine(train grad, dev
// grad) substitutes for the influence score; no rollouts, no Reptile.
struct GradAlignRound {
    std::vector<int> subsample;
    std::map<int, double> rewards;
    double reward_std = 0.0;
};

GradAlignRound grad_align_round(const ModelParams& params, const Corpus& corpus,
                                const TrainConfig& config, SamplerState& sampler,
                                const Rng& round_rng) {
    GradAlignRound out;
    Rng sub_rng = meta_subsample_stream(round_rng);
    out.subsample = draw_subsample(corpus.train.size(), sampler.subsample_size, sub_rng);

    const Rng inf_rng = meta_influence_stream(round_rng);
    std::vector<std::vector<Matrix>> dev_grads;
    for (size_t j = 0; j < corpus.dev.size(); ++j) {
        Rng batch_rng = dev_batch_stream(inf_rng, j);
        const DevBatch batch =
            draw_dev_batch(corpus.dev[j], config.meta.dev_batch_size, batch_rng);
        LossGrads lg = loss_and_grads(params, batch.pairs);
        dev_grads.push_back({std::move(lg.grad_e), std::move(lg.grad_w)});
    }

    std::vector<double> values;
    for (int i : out.subsample) {
        Rng roll_rng = rollout_stream(inf_rng, i);
        const auto batch = sample_batch(corpus.train[i], config.batch_size, roll_rng);
        LossGrads lg = loss_and_grads(params, batch);
        const std::vector<Matrix> gi = {std::move(lg.grad_e), std::move(lg.grad_w)};
        double reward = 0.0;
        for (const auto& gd : dev_grads) reward += grad_alignment_reward(gi, gd);
        reward /= static_cast<double>(dev_grads.size());
        out.rewards[i] = reward;
        values.push_back(reward);
    }
    out.reward_std = stddev(values);
    sampler = reinforce_update(sampler, out.subsample, out.rewards);
    return out;
}

}  // namespace

ReptileWeights reptile_weights(std::span<const double> influences, ReptileWeighting weighting,
                               double tau_r) {
    if (influences.empty()) throw std::invalid_argument("reptile_weights: empty influences");
    for (double v : influences)
        if (!std::isfinite(v)) throw std::runtime_error("reptile_weights: non-finite influence");

    ReptileWeights out;
    out.p.resize(influences.size());
    if (weighting == ReptileWeighting::SoftmaxTau) {
        if (!(tau_r > 0.0)) throw std::invalid_argument("reptile_weights: tau_r must be > 0");
        double mx = influences[0];
        for (double v : influences) mx = std::max(mx, v);
        double denom = 0.0;
        for (size_t i = 0; i < influences.size(); ++i) {
            out.p[i] = std::exp((influences[i] - mx) / tau_r);
            denom += out.p[i];
        }
        for (double& v : out.p) v /= denom;
        out.valid = true;
    } else {
        constexpr double kEpsSum = 1e-12;
        double sum = 0.0;
        for (double v : influences) sum += v;
        if (std::fabs(sum) <= kEpsSum) {
            out.valid = false;
            return out;
        }
        for (size_t i = 0; i < influences.size(); ++i) out.p[i] = influences[i] / sum;
        out.valid = true;
    }
    return out;
}

std::vector<Matrix> weighted_reptile_update(std::span<Matrix> params,
                                            std::span<const std::vector<Matrix>> displacements,
                                            std::span<const double> p, double alpha) {
    if (displacements.size() != p.size())
        throw std::invalid_argument("weighted_reptile_update: p/displacements count mismatch");
    std::vector<Matrix> applied;
    applied.reserve(params.size());
    for (const auto& t : params) applied.emplace_back(t.rows, t.cols);

    for (size_t i = 0; i < displacements.size(); ++i) {
        if (displacements[i].size() != params.size())
            throw std::invalid_argument("weighted_reptile_update: tensor count mismatch");
        for (size_t t = 0; t < params.size(); ++t) {
            if (!params[t].same_shape(displacements[i][t]))
                throw std::invalid_argument("weighted_reptile_update: shape mismatch");
            add_scaled(applied[t], displacements[i][t], alpha * p[i]);
        }
    }
    for (size_t t = 0; t < params.size(); ++t) add_scaled(params[t], applied[t], 1.0);
    return applied;
}

Rng meta_subsample_stream(const Rng& round_rng) { return round_rng.split(kSubsampleTag); }
Rng meta_influence_stream(const Rng& round_rng) { return round_rng.split(kInfluenceTag); }

MetaRoundResult meta_round(ModelParams& params, OptimizerState& opt, SamplerState& sampler,
                           const Corpus& corpus, const TrainConfig& config, long step,
                           const Rng& round_rng) {
    MetaRoundResult result;
    result.psi_before = sampler.psi;

    Rng sub_rng = meta_subsample_stream(round_rng);
    result.subsample = draw_subsample(corpus.train.size(), sampler.subsample_size, sub_rng);

    std::vector<const DomainDataset*> datasets;
    datasets.reserve(result.subsample.size());
    for (int i : result.subsample) datasets.push_back(&corpus.train[i]);

    InfluenceOptions opts;
    opts.l = config.meta.l;
    opts.batch_size = config.batch_size;
    opts.dev_batch_size = config.meta.dev_batch_size;
    opts.metric = config.meta.metric;
    opts.per_step_accumulation = config.meta.per_step_accumulation;

    const Rng inf_rng = meta_influence_stream(round_rng);
    result.report = influence_round(params, opt, datasets, corpus.dev, opts, step, inf_rng);

    std::vector<double> influences;
    std::map<int, double> influence_map;
    influences.reserve(result.subsample.size());
    for (int i : result.subsample) {
        const double v = result.report.per_dataset.at(i).influence;
        influences.push_back(v);
        influence_map[i] = v;
    }
    result.reward_std = stddev(influences);

    if (config.meta.reptile_enabled) {
        const double tau_r = config.meta.reptile_tau > 0.0
                                 ? config.meta.reptile_tau
                                 : std::max(result.reward_std, 1e-6);
        const ReptileWeights rw =
            reptile_weights(influences, config.meta.weighting, tau_r);
        if (!rw.valid) {
            std::fprintf(stderr,
                         "warning: step %ld meta-round skipped model update "
                         "(reward-normalized weights undefined, sum of influences ~ 0)\n",
                         step);
        } else {
            const double alpha = opt.current_lr();
            std::vector<std::vector<Matrix>> disps;
            disps.reserve(result.subsample.size());
            for (int i : result.subsample)
                disps.push_back(result.report.per_dataset.at(i).displacement);

            std::vector<Matrix> tensors = {std::move(params.E), std::move(params.W)};
            const std::vector<Matrix> applied =
                weighted_reptile_update(tensors, disps, rw.p, alpha);
            params.E = std::move(tensors[0]);
            params.W = std::move(tensors[1]);

            result.reptile_p = rw.p;
            result.applied_update_norm = norm_flat_set(applied);
            result.reptile_applied = true;

            // advance optimizer moments with the gradient that would have
            // produced the applied displacement under plain SGD; skipped when
            // nothing moved so a no-op round leaves no trace in the schedule
            if (result.applied_update_norm > 0.0 && alpha > 0.0) {
                std::vector<Matrix> pseudo;
                pseudo.reserve(applied.size());
                for (const auto& m : applied) {
                    Matrix g = m;
                    scale(g, -1.0 / alpha);
                    pseudo.push_back(std::move(g));
                }
                optimizer_state_update(opt, pseudo);
            }
        }
    }

    sampler = reinforce_update(sampler, result.subsample, influence_map);
    result.psi_after = sampler.psi;
    return result;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config) {
    if (corpus.train.empty()) throw std::invalid_argument("train: corpus has no train datasets");
    if (corpus.dev.empty()) throw std::invalid_argument("train: corpus has no dev sets");

    const Rng root(config.seed);
    Rng init_rng = root.split(kInitStream);
    ModelParams params = ModelParams::init(config.model.vocab_buckets, config.model.d,
                                           config.model.d_out, config.model.t_sim, init_rng);
    OptimizerState opt = make_optimizer(config, params.tensors_copy());
    SamplerState sampler = make_sampler(corpus, config);

    const auto sizes = corpus.train_sizes();
    const std::string strat_name = strategy_name(config.strategy);
    const bool dynamic =
        config.strategy == Strategy::InfDds || config.strategy == Strategy::GradAlign;

    TrainResult result;
    Rng train_rng = root.split(kTrainStream);
    long round_index = 0;

    for (long t = 0; t < config.total_steps; ++t) {
        std::vector<double> probs;
        switch (config.strategy) {
            case Strategy::Cooldown:
                probs = cooldown_schedule(t, config.total_steps, config.cooldown.tau_start,
                                          config.cooldown.tau_end,
                                          config.cooldown.switch_fraction, sizes);
                break;
            default:
                probs = probabilities(sampler);
                break;
        }

        // with interleaving disabled the model moves only through meta-round
        // updates once past warmup (the schedule in Algorithm 1 as written)
        const bool run_ordinary =
            config.meta.interleave_ordinary || !dynamic || t < config.meta.warmup_steps;
        if (run_ordinary) {
            const int chosen = sample_categorical(probs, train_rng);
            const StepResult sr =
                train_step(params, opt, corpus.train[chosen], config.batch_size, train_rng);
            if (!std::isfinite(sr.loss) || !all_finite(params.E) || !all_finite(params.W))
                throw std::runtime_error("train: non-finite parameters at step " +
                                         std::to_string(t));
        }

        // meta-round cadence: after ordinary step t, once past scorer warmup
        std::map<int, double> logged_influence;
        const long done = t + 1;
        const bool meta_step = dynamic && config.meta.l > 0 && done > config.meta.warmup_steps &&
                               (done - config.meta.warmup_steps) % config.meta.update_every == 0;
        if (meta_step) {
            const Rng round_rng =
                root.split(kRoundStreamBase + static_cast<uint64_t>(round_index));
            ++round_index;
            if (config.strategy == Strategy::InfDds) {
                MetaRoundResult mr = meta_round(params, opt, sampler, corpus, config, t, round_rng);
                for (int i : mr.subsample)
                    logged_influence[i] = mr.report.per_dataset.at(i).influence;
                result.round_stats.push_back({t, mr.reward_std, mr.applied_update_norm});
            } else {
                GradAlignRound gr = grad_align_round(params, corpus, config, sampler, round_rng);
                logged_influence = gr.rewards;
                result.round_stats.push_back({t, gr.reward_std, 0.0});
            }
            ++result.meta_rounds;
        }

        std::optional<double> eval_value;
        if (done % config.eval_every == 0 || t == config.total_steps - 1) {
            const double m = dev_metric(params, corpus.dev);
            eval_value = m;
            if (m > result.best_dev_metric || result.best_step < 0) {
                result.best_dev_metric = m;
                result.best_step = t;
                result.params = params;
            }
            result.final_dev_metric = m;
        }

        for (size_t i = 0; i < corpus.train.size(); ++i) {
            TrajectoryRow row;
            row.step = t;
            row.dataset_id = static_cast<int>(i);
            row.dataset_name = corpus.train[i].name;
            row.probability = probs[i];
            auto it = logged_influence.find(static_cast<int>(i));
            if (it != logged_influence.end()) row.influence = it->second;
            row.dev_metric = eval_value;
            row.strategy = strat_name;
            row.seed = config.seed;
            result.log.rows.push_back(std::move(row));
        }
    }

    if (result.best_step < 0) {
        result.best_dev_metric = dev_metric(params, corpus.dev);
        result.final_dev_metric = result.best_dev_metric;
        result.best_step = config.total_steps - 1;
        result.params = params;
    }
    result.final_params = params;
    result.sampler = sampler;
    return result;
}

}  // namespace infdds
