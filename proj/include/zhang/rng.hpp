#pragma once

#include <cstdint>
#include <random>

namespace zhang {

/**
 * @brief Seedable, splittable random stream.
 *
 * Wraps std::mt19937_64 with distribution code written out explicitly so that
 * draws are identical across standard library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// a + (b - a) * u with u uniform on [0, 1).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Unbiased uniform integer on {0, ..., n-1}; n must be positive.
    std::uint64_t index(std::uint64_t n);

    /// Independent child stream; advances this stream.
    Rng split();

private:
    std::mt19937_64 engine_;
};

/// Deterministic seed mixing (SplitMix64 finalizer), used to derive replica seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace zhang
