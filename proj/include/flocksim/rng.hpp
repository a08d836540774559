#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random numbers: every draw is a pure function of a 64-bit key
// and a counter, so ensembles are reproducible independent of thread count,
// scheduling, and refinement order. std::normal_distribution is deliberately
// not used anywhere; its output is implementation-defined.

namespace flocksim::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

// Keyed counter hash; for a fixed key, injective in ctr.
inline std::uint64_t hash2(std::uint64_t key, std::uint64_t ctr) {
    return mix64((key + kGolden) ^ mix64(ctr + 0xd1b54a32d192ed03ull));
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return hash2(hash2(a, b), c);
}

// Uniform in [0, 1) from the top 53 bits.
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One standard Gaussian per hash word, Box-Muller (cosine branch).
// Two sub-streams are split off the word with fixed xor masks; mix64 is a
// bijection so distinct words never produce colliding pairs.
inline double gaussian(std::uint64_t h) {
    const double u1 = 1.0 - u01(mix64(h ^ 0x8cb92ba72f3d8dd7ull)); // (0,1]
    const double u2 = u01(mix64(h ^ 0x3c6ef372fe94f82bull));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692528676655900577 * u2);
}

// Sequential view over a keyed counter; one counter word per draw.
struct GaussianStream {
    std::uint64_t key = 0;
    std::uint64_t ctr = 0;

    double next() { return gaussian(hash2(key, ctr++)); }
    double next_u01() { return u01(hash2(key, ctr++)); }
};

// Stream-purpose tags, hashed into the per-path seed so the initial-data
// draws and the Brownian increments never share counters.
inline constexpr std::uint64_t kTagWiener = 0x57494e4552ull;
inline constexpr std::uint64_t kTagInit = 0x494e4954ull;

inline std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_index) {
    return hash2(master_seed, path_index);
}

} // namespace flocksim::rng
