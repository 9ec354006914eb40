#pragma once

#include <cstdint>

namespace infdds {

/// Counter-based deterministic generator (splitmix64 with random access).
/// Same seed + same call sequence gives the same outputs on any platform.
/// split() derives an independent stream, so proxy rollouts and dev-batch
/// draws never perturb the main training stream.
class Rng {
   public:
    explicit Rng(uint64_t seed) : seed_(seed) {}

    uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();

    // uniform integer in [0, n), n >= 1
    uint64_t below(uint64_t n);

    // standard normal via Box-Muller (consumes exactly two uniforms)
    double normal();

    // independent stream keyed by `stream`; counter starts at zero
    Rng split(uint64_t stream) const;

    uint64_t seed() const { return seed_; }

   private:
    uint64_t seed_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace infdds
