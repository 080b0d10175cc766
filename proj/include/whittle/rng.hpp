#pragma once

#include <cstdint>
#include <random>

namespace whittle {

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 but draws doubles and bounded integers through
/// fixed bit manipulations instead of std::*_distribution, whose output is
/// implementation-defined. Two builds given the same seed therefore produce
/// the same sequence.
///
/// Stream derivation: fork(i) seeds a child generator with
/// splitmix64(seed + (i+1) * 0x9E3779B97F4A7C15). A run owns stream 0 for
/// run-level draws and stream (1 + slice) for each threshold-state slice,
/// so serial and per-slice-parallel execution see identical randomness.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

    /// Child stream derived from this stream's seed (not its current state).
    Rng fork(std::uint64_t index) const {
        return Rng(splitmix64(seed_ + (index + 1) * 0x9E3779B97F4A7C15ULL));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Requires n >= 1.
    int uniform_int(int n) {
        int k = static_cast<int>(uniform01() * static_cast<double>(n));
        return k < n ? k : n - 1;  // uniform01() < 1 makes this unreachable in practice
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace whittle
