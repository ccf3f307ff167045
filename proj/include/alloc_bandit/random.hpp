#pragma once

#include <cstdint>
#include <random>

namespace alloc_bandit {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive
// statistically independent child seeds from (parent, index) pairs.
std::uint64_t mix_seed(std::uint64_t x);

// Child seed for stream `index` of `base_seed`. Extending the index range
// never perturbs seeds already handed out.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

// Seeded uniform stream. Doubles are built from the top 53 bits of each
// engine output so draws are identical across standard library vendors.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace alloc_bandit
