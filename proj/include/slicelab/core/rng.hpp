#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slicelab {

/// Seeded random source. Single owner; derive independent streams with
/// substream() instead of sharing one instance between components.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0);

    /// Stream for `domain` (e.g. "sim", "agent") derived from `seed`.
    static Rng substream(std::string_view domain, std::uint64_t seed);
    /// Stream for `domain` and an additional index (episode, seed slot, ...).
    static Rng substream(std::string_view domain, std::uint64_t seed, std::uint64_t index);

    /// Child stream derived from the next draw of this one.
    Rng split(std::string_view domain);

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                          // [0, 1)
    double uniform(double lo, double hi);      // [lo, hi)
    int uniform_int(int lo, int hi);           // [lo, hi]
    double normal(double mean, double stddev);

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Stable 64-bit hash of a domain label.
std::uint64_t hash_domain(std::string_view domain);

}  // namespace slicelab
