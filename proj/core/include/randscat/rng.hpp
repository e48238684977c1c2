#pragma once

#include <cstdint>
#include <cmath>

namespace randscat::rng {

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform in (0,1]; top 53 bits of the word.
inline double to_unit(std::uint64_t u) { return double((u >> 11) + 1) * 0x1.0p-53; }

/// Counter-based standard normal keyed by (seed, counter). Stateless, so the
/// draw for a given voxel is independent of evaluation order and threading.
inline double normal_at(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t key = mix64(seed ^ 0x6A09E667F3BCC909ull);
    const std::uint64_t u1 = mix64(key ^ mix64(2 * counter + 1));
    const std::uint64_t u2 = mix64(key ^ mix64(2 * counter + 2) ^ 0xBB67AE8584CAA73Bull);
    const double r = std::sqrt(-2.0 * std::log(to_unit(u1)));
    return r * std::cos(2.0 * M_PI * to_unit(u2));
}

/// Secondary stream (independent of normal_at) for probe vectors and the like.
inline double uniform_at(std::uint64_t seed, std::uint64_t counter) {
    return to_unit(mix64(mix64(seed ^ 0x3C6EF372FE94F82Bull) ^ mix64(counter)));
}

}  // namespace randscat::rng
