#pragma once

// Seed derivation for independent, reproducible random streams.

#include <cmath>
#include <cstdint>
#include <random>

namespace epizoo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of substream `index` under `base`. Distinct indices give unrelated seeds.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return stream_seed(stream_seed(base, a), b);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// floor(x) plus a Bernoulli draw on the fractional part; unbiased for x >= 0.
inline std::int64_t stochastic_round(double x, Rng& rng) {
    if (x <= 0.0) return 0;
    const double base = std::floor(x);
    return static_cast<std::int64_t>(base) + (uniform01(rng) < x - base ? 1 : 0);
}

}  // namespace epizoo
