#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infdds/corpus.hpp"
#include "infdds/matrix.hpp"
#include "infdds/optimizer.hpp"
#include "infdds/rng.hpp"

namespace infdds {

/// Hashed bag-of-embeddings biencoder: mean of token-embedding rows, linear
/// projection, L2 normalization. Queries and passages share E and W.
struct ModelParams {
    Matrix E;            // vocab_buckets x d token embeddings
    Matrix W;            // d x d_out projection
    double t_sim = 0.02;  // similarity temperature

    static ModelParams init(size_t vocab_buckets, size_t d, size_t d_out, double t_sim,
                            Rng& rng);

    std::vector<Matrix> tensors_copy() const { return {E, W}; }
    static const std::vector<std::string>& tensor_names();
};

// Stable hash of each whitespace token (lowercased) modulo vocab_buckets.
std::vector<uint32_t> tokenize_hash(std::string_view text, uint32_t vocab_buckets);

// One unit-norm row per text. Throws on empty token sequences and on
// degenerate (zero-norm) projections.
Matrix encode(const ModelParams& params, std::span<const std::string> texts);

// Mean over rows i of -log softmax_i(Q P^T / t_sim)[i]; B >= 2.
double info_nce_loss(const Matrix& q, const Matrix& p, double t_sim);

struct LossGrads {
    double loss = 0.0;
    Matrix grad_e;
    Matrix grad_w;
};

// Analytic gradients of info_nce_loss through normalization, projection and
// mean pooling, for a batch of (query, positive) texts.
LossGrads loss_and_grads(const ModelParams& params, std::span<const TextPair> batch);

struct StepResult {
    double loss = 0.0;
    double lr = 0.0;
};

// sample_batch + loss_and_grads + optimizer_step.
StepResult train_step(ModelParams& params, OptimizerState& opt, const DomainDataset& dataset,
                      size_t batch_size, Rng& rng);

// Versioned text checkpoint (E, W, t_sim). load rejects version mismatches.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace infdds
