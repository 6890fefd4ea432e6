#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace edsc {

/// Seeded random stream. All simulator randomness flows from one root seed
/// through named substreams so that sweeps vary a single factor cleanly.
/// The engine is std::mt19937_64 (bit-exact per the standard); the
/// value mappings below are our own so output does not depend on any
/// library's distribution implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    /// Derive a substream from (root_seed, name).
    static Rng substream(uint64_t root_seed, std::string_view name);

    uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_int(uint64_t n) { return next() % n; }

    /// Exponential with the given mean (inverse CDF).
    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace edsc
