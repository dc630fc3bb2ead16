#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace isokern {

// Deterministic random stream. One master seed per run; every consumer
// derives its own stream from (seed, label) so adding a consumer never
// perturbs the draws of another, and toggling mechanism variants leaves
// workload arrival times untouched.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1). 53 usable bits; identical across platforms since the
    // engine is fully specified and we avoid std distributions.
    double next_unit() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return gen_() % n; }

    // Exponential with the given rate (events per second), returned as an
    // integer nanosecond gap, floored at 1 ns.
    std::uint64_t next_exponential_ns(double rate_per_sec);

    // Uniform double in [lo, hi).
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  private:
    std::mt19937_64 gen_;
};

std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

inline RngStream derive_stream(std::uint64_t master, std::string_view label) {
    return RngStream(derive_seed(master, label));
}

}  // namespace isokern
