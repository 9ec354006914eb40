#include "infdds/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace infdds {

std::vector<double> probabilities(const SamplerState& state) {
    const auto& psi = state.psi;
    if (psi.empty()) throw std::invalid_argument("probabilities: empty psi");
    double mx = psi[0];
    for (double v : psi) {
        if (!std::isfinite(v)) throw std::runtime_error("probabilities: non-finite psi");
        mx = std::max(mx, v);
    }
    std::vector<double> p(psi.size());
    double denom = 0.0;
    for (size_t i = 0; i < psi.size(); ++i) {
        p[i] = std::exp(psi[i] - mx);
        denom += p[i];
    }
    for (double& v : p) v /= denom;
    return p;
}

SamplerState init_from_temperature(std::span<const size_t> sizes, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("init_from_temperature: tau must be > 0");
    SamplerState st;
    st.psi.reserve(sizes.size());
    for (size_t s : sizes) {
        if (s == 0) throw std::invalid_argument("init_from_temperature: sizes must be positive");
        st.psi.push_back(std::isinf(tau) ? 0.0
                                         : std::log(static_cast<double>(s)) / tau);
    }
    return st;
}

SamplerState init_from_weights(std::span<const double> weights) {
    constexpr double kFloor = 1e-12;
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("init_from_weights: weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("init_from_weights: all-zero weights");
    SamplerState st;
    st.psi.reserve(weights.size());
    for (double w : weights) st.psi.push_back(std::log(w + kFloor));
    return st;
}

std::map<int, double> conditional_probabilities(const SamplerState& state,
                                                std::span<const int> subsample) {
    if (subsample.empty())
        throw std::invalid_argument("conditional_probabilities: empty subsample");
    const auto p = probabilities(state);
    double denom = 0.0;
    for (int i : subsample) {
        if (i < 0 || static_cast<size_t>(i) >= p.size())
            throw std::invalid_argument("conditional_probabilities: index out of range");
        denom += p[i];
    }
    std::map<int, double> out;
    for (int i : subsample) out[i] = p[i] / denom;
    return out;
}

int sample_dataset(const SamplerState& state, Rng& rng) {
    const auto p = probabilities(state);
    const double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size() - 1);
}

std::vector<double> scorer_gradient(const SamplerState& state, std::span<const int> subsample,
                                    const std::map<int, double>& influences) {
    if (subsample.empty()) throw std::invalid_argument("scorer_gradient: empty subsample");
    const size_t m = state.psi.size();
    const auto p_full = probabilities(state);

    double mean_reward = 0.0;
    for (int i : subsample) {
        auto it = influences.find(i);
        if (it == influences.end())
            throw std::invalid_argument("scorer_gradient: missing influence for dataset " +
                                        std::to_string(i));
        if (!std::isfinite(it->second))
            throw std::runtime_error("scorer_gradient: non-finite influence for dataset " +
                                     std::to_string(i));
        mean_reward += it->second;
    }
    mean_reward /= static_cast<double>(subsample.size());

    std::vector<double> d_psi(m, 0.0);
    if (state.mode == ScorerMode::ConditionalLogProb) {
        const auto p_cond = conditional_probabilities(state, subsample);
        for (int i : subsample) {
            const double reward =
                influences.at(i) - (state.center_rewards ? mean_reward : 0.0);
            const double w = p_full[i] * reward;
            // grad_psi log P(i|S) lives on S only: delta_ij - P(j|S)
            for (int j : subsample)
                d_psi[j] += w * ((i == j ? 1.0 : 0.0) - p_cond.at(j));
        }
    } else {
        for (int i : subsample) {
            const double reward =
                influences.at(i) - (state.center_rewards ? mean_reward : 0.0);
            const double w = p_full[i] * reward;
            for (size_t j = 0; j < m; ++j)
                d_psi[j] += w * ((static_cast<size_t>(i) == j ? 1.0 : 0.0) - p_full[j]);
        }
    }
    return d_psi;
}

SamplerState reinforce_update(const SamplerState& state, std::span<const int> subsample,
                              const std::map<int, double>& influences) {
    const auto d_psi = scorer_gradient(state, subsample, influences);
    SamplerState next = state;
    const double sign = state.ascend ? 1.0 : -1.0;
    for (size_t j = 0; j < next.psi.size(); ++j)
        next.psi[j] += sign * state.scorer_lr * d_psi[j];
    return next;
}

std::vector<int> draw_subsample(size_t num_datasets, size_t k, Rng& rng) {
    if (k == 0 || k > num_datasets)
        throw std::invalid_argument("draw_subsample: k must be in [1, M]");
    std::vector<int> idx(num_datasets);
    for (size_t i = 0; i < num_datasets; ++i) idx[i] = static_cast<int>(i);
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + rng.below(num_datasets - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace infdds
