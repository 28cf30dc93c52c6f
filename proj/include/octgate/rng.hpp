#pragma once

#include <cstdint>
#include <random>

namespace octgate {

/// Seeded random source with platform-independent distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are implementation defined,
/// so uniform/normal/integer draws are computed here to keep every seeded
/// pipeline bit-reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal (Marsaglia polar method).
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }
    bool coin() { return (next() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seed-splitting rule: every per-item stream is derived from the top-level
/// seed, a stream tag and an item index through splitmix64, so results do
/// not depend on the order in which items are processed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace octgate
