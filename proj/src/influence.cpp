#include "infdds/influence.hpp"

#include <stdexcept>

namespace infdds {

namespace {

constexpr uint64_t kDevBatchStream = 0xd00;
constexpr uint64_t kRolloutStream = 0x100000;

std::vector<int> relevant_query_indices(const DevSet& ds) {
    std::vector<int> out;
    for (size_t i = 0; i < ds.queries.size(); ++i) {
        for (const auto& [pid, g] : ds.queries[i].qrels) {
            if (g > 0) {
                out.push_back(static_cast<int>(i));
                break;
            }
        }
    }
    return out;
}

}  // namespace

Rng rollout_stream(const Rng& round_rng, int dataset_id) {
    return round_rng.split(kRolloutStream + static_cast<uint64_t>(dataset_id));
}

Rng dev_batch_stream(const Rng& round_rng, size_t devset_index) {
    return round_rng.split(kDevBatchStream + devset_index);
}

DevBatch draw_dev_batch(const DevSet& dev_set, size_t batch_size, Rng& rng) {
    if (batch_size == 0) throw std::invalid_argument("draw_dev_batch: batch_size must be >= 1");
    const auto eligible = relevant_query_indices(dev_set);
    if (eligible.empty())
        throw std::runtime_error("draw_dev_batch: dev set '" + dev_set.name +
                                 "' has no relevant queries");

    DevBatch batch;
    batch.devset_id = dev_set.id;
    batch.source = &dev_set;

    const size_t n = eligible.size();
    if (batch_size >= n) {
        batch.query_indices = eligible;
    } else {
        std::vector<int> idx = eligible;
        for (size_t i = 0; i < batch_size; ++i) {
            const size_t j = i + rng.below(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(batch_size);
        std::sort(idx.begin(), idx.end());
        batch.query_indices = std::move(idx);
    }

    for (int qi : batch.query_indices) {
        const DevQuery& q = dev_set.queries[qi];
        // first relevant passage in id order is the positive
        for (const auto& [pid, g] : q.qrels) {
            if (g > 0) {
                batch.pairs.emplace_back(
                    q.text, dev_set.passages[dev_set.passage_index.at(pid)].second);
                break;
            }
        }
    }
    return batch;
}

double evaluate_metric(const ModelParams& params, const DevBatch& batch, InfluenceMetric choice) {
    if (batch.pairs.empty()) throw std::invalid_argument("evaluate_metric: empty dev batch");
    if (choice == InfluenceMetric::NegInfoNce) {
        std::vector<std::string> queries, positives;
        queries.reserve(batch.pairs.size());
        positives.reserve(batch.pairs.size());
        for (const auto& [q, p] : batch.pairs) {
            queries.push_back(q);
            positives.push_back(p);
        }
        const Matrix qu = encode(params, queries);
        const Matrix pu = encode(params, positives);
        return -info_nce_loss(qu, pu, params.t_sim);
    }
    const EvalResult res =
        evaluate_retrieval(params, *batch.source, 10, batch.query_indices);
    return res.mean_ndcg;
}

ModelParams proxy_rollout(const ModelParams& theta, const OptimizerState& opt,
                          const DomainDataset& dataset, int l, size_t batch_size, Rng& rng) {
    if (l < 1) throw std::invalid_argument("proxy_rollout: l must be >= 1");
    ModelParams clone = theta;
    OptimizerState opt_clone = opt;
    for (int s = 0; s < l; ++s) train_step(clone, opt_clone, dataset, batch_size, rng);
    return clone;
}

InfluenceReport influence_round(const ModelParams& theta, const OptimizerState& opt,
                                const std::vector<const DomainDataset*>& datasets,
                                std::span<const DevSet> dev_sets, const InfluenceOptions& options,
                                long round_step, const Rng& rng, const MetricEvalHook& hook) {
    if (datasets.empty()) throw std::invalid_argument("influence_round: empty dataset subsample");
    if (dev_sets.empty()) throw std::invalid_argument("influence_round: no dev sets");
    if (options.l < 1) throw std::invalid_argument("influence_round: l must be >= 1");

    InfluenceReport report;
    report.round_step = round_step;

    // one fresh dev batch per dev set, shared across all datasets this round
    std::vector<DevBatch> batches;
    std::vector<double> baseline(dev_sets.size());
    for (size_t j = 0; j < dev_sets.size(); ++j) {
        Rng batch_rng = dev_batch_stream(rng, j);
        batches.push_back(draw_dev_batch(dev_sets[j], options.dev_batch_size, batch_rng));
        baseline[j] = evaluate_metric(theta, batches[j], options.metric);
        if (hook) hook(static_cast<int>(j), true);
        report.dev_batch_ids.push_back(batches[j].query_indices);
    }

    const std::vector<Matrix> theta_tensors = theta.tensors_copy();
    for (const DomainDataset* ds : datasets) {
        Rng roll_rng = rollout_stream(rng, ds->id);
        DatasetInfluence entry;
        entry.deltas.assign(dev_sets.size(), 0.0);

        ModelParams proxy = theta;
        OptimizerState proxy_opt = opt;
        for (int s = 0; s < options.l; ++s) {
            train_step(proxy, proxy_opt, *ds, options.batch_size, roll_rng);
            if (options.per_step_accumulation || s == options.l - 1) {
                for (size_t j = 0; j < dev_sets.size(); ++j) {
                    const double m = evaluate_metric(proxy, batches[j], options.metric);
                    if (hook) hook(static_cast<int>(j), false);
                    entry.deltas[j] += m - baseline[j];
                }
            }
        }

        double sum = 0.0;
        for (double d : entry.deltas) sum += d;
        entry.influence = sum / static_cast<double>(entry.deltas.size());

        const std::vector<Matrix> moved = proxy.tensors_copy();
        entry.displacement.reserve(moved.size());
        for (size_t t = 0; t < moved.size(); ++t)
            entry.displacement.push_back(sub(moved[t], theta_tensors[t]));
        report.per_dataset.emplace(ds->id, std::move(entry));
    }
    return report;
}

}  // namespace infdds
