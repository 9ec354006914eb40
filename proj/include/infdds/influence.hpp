#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "infdds/corpus.hpp"
#include "infdds/eval.hpp"
#include "infdds/retriever.hpp"

namespace infdds {

enum class InfluenceMetric { NegInfoNce, NdcgAt10 };

/// One sampled dev batch: the query indices drawn from the dev set, paired
/// with their first relevant passage for the contrastive metric. NDCG-based
/// influence re-ranks the same queries against the set's frozen passages.
struct DevBatch {
    int devset_id = 0;
    const DevSet* source = nullptr;
    std::vector<int> query_indices;
    std::vector<TextPair> pairs;
};

DevBatch draw_dev_batch(const DevSet& dev_set, size_t batch_size, Rng& rng);

// Scalar "higher is better" score of params on the batch.
double evaluate_metric(const ModelParams& params, const DevBatch& batch, InfluenceMetric choice);

// Clone theta and opt, take l train steps on the dataset, return the moved
// clone. The shared theta and opt are untouched.
ModelParams proxy_rollout(const ModelParams& theta, const OptimizerState& opt,
                          const DomainDataset& dataset, int l, size_t batch_size, Rng& rng);

struct DatasetInfluence {
    double influence = 0.0;              // mean over deltas
    std::vector<double> deltas;          // one per dev set
    std::vector<Matrix> displacement;    // theta_{t+1}^i - theta_t, per tensor
};

struct InfluenceReport {
    long round_step = 0;
    std::map<int, DatasetInfluence> per_dataset;
    std::vector<std::vector<int>> dev_batch_ids;  // evaluated query indices per dev set
};

struct InfluenceOptions {
    int l = 3;
    size_t batch_size = 16;
    size_t dev_batch_size = 64;
    InfluenceMetric metric = InfluenceMetric::NegInfoNce;
    bool per_step_accumulation = false;  // accumulate deltas vs baseline after every step
};

// Hook fired on every metric evaluation (devset id, whether it was the
// shared baseline evaluation of theta_t). Lets tests count baseline reuse.
using MetricEvalHook = std::function<void(int, bool)>;

// rng streams consumed inside influence_round, exposed so tests can replay a
// specific rollout or dev-batch draw.
Rng rollout_stream(const Rng& round_rng, int dataset_id);
Rng dev_batch_stream(const Rng& round_rng, size_t devset_index);

// One influence round over the subsample: draws one dev batch per dev set,
// evaluates theta_t once per batch, rolls every dataset out for l steps and
// reports per-dataset deltas, means, and parameter displacements.
InfluenceReport influence_round(const ModelParams& theta, const OptimizerState& opt,
                                const std::vector<const DomainDataset*>& datasets,
                                std::span<const DevSet> dev_sets, const InfluenceOptions& options,
                                long round_step, const Rng& rng,
                                const MetricEvalHook& hook = nullptr);

}  // namespace infdds
