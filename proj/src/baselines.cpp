#include "infdds/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace infdds {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::StaticTau: return "static";
        case Strategy::Cooldown: return "cooldown";
        case Strategy::InfDds: return "inf-dds";
        case Strategy::GradAlign: return "grad-align";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "static") return Strategy::StaticTau;
    if (name == "cooldown") return Strategy::Cooldown;
    if (name == "inf-dds") return Strategy::InfDds;
    if (name == "grad-align") return Strategy::GradAlign;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::vector<double> temperature_distribution(std::span<const size_t> sizes, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("temperature_distribution: tau must be > 0");
    const double expo = std::isinf(tau) ? 0.0 : 1.0 / tau;
    std::vector<double> p(sizes.size());
    double total = 0.0;
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0)
            throw std::invalid_argument("temperature_distribution: sizes must be positive");
        p[i] = std::pow(static_cast<double>(sizes[i]), expo);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

std::vector<double> cooldown_schedule(long step, long total_steps, double tau_start,
                                      double tau_end, double switch_fraction,
                                      std::span<const size_t> sizes) {
    if (!(switch_fraction > 0.0 && switch_fraction < 1.0))
        throw std::invalid_argument("cooldown_schedule: switch_fraction must be in (0,1)");
    if (!(tau_start > 0.0) || !(tau_end > 0.0))
        throw std::invalid_argument("cooldown_schedule: temperatures must be > 0");
    if (total_steps < 1) throw std::invalid_argument("cooldown_schedule: total_steps must be >= 1");

    const double switch_step = switch_fraction * static_cast<double>(total_steps);
    const double frac = std::min(1.0, static_cast<double>(step) / switch_step);
    // interpolate the exponent 1/tau so tau_end = inf lands exactly on uniform
    const double e_start = std::isinf(tau_start) ? 0.0 : 1.0 / tau_start;
    const double e_end = std::isinf(tau_end) ? 0.0 : 1.0 / tau_end;
    const double expo = e_start + frac * (e_end - e_start);

    std::vector<double> p(sizes.size());
    double total = 0.0;
    for (size_t i = 0; i < sizes.size(); ++i) {
        p[i] = std::pow(static_cast<double>(sizes[i]), expo);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

double grad_alignment_reward(std::span<const Matrix> train_grads,
                             std::span<const Matrix> dev_grads) {
    const double num = dot_flat_set(train_grads, dev_grads);
    if (!std::isfinite(num))
        throw std::runtime_error("grad_alignment_reward: non-finite gradients");
    const double na = norm_flat_set(train_grads);
    const double nb = norm_flat_set(dev_grads);
    if (na == 0.0 || nb == 0.0) {
        std::fprintf(stderr, "warning: zero-norm gradient in alignment reward, using 0\n");
        return 0.0;
    }
    return num / (na * nb);
}

}  // namespace infdds
