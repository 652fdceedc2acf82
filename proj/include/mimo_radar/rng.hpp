#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mimo_radar {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent generator for (seed, stream, index). Results depend only on
/// these three counters, never on scheduling, so parallel runs reproduce
/// serial ones bit for bit.
inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t a = splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x8CB92BA72F3D8DD7ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

/// Circularly symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance) {
    std::normal_distribution<double> unit(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = unit(rng);
    const double im = unit(rng);
    return {s * re, s * im};
}

inline double real_normal(Rng& rng, double variance) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return std::sqrt(variance) * unit(rng);
}

}  // namespace mimo_radar
