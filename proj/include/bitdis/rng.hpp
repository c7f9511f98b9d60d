#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace bitdis {

// SplitMix64 finalizer. Used both as a bit mixer for seed derivation and as a
// cheap hash for small integer tuples.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic per-trial seed derivation: fold each identifying component
// into the master seed, one mix round per component. The exact formula is
// part of the reproducibility contract (changing it silently invalidates
// archived result CSVs), so keep it in sync with the README.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master ^ 0x8f1bbcdcbfa53e0bull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Uniform in [0,1) with 53 random bits.
inline double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& g, double p) { return uniform01(g) < p; }

// Unbiased uniform draw from {0, ..., n-1}. Rejects the short cycle at the
// bottom of the 64-bit range so every residue is equally likely.
inline std::uint64_t uniform_below(Rng& g, std::uint64_t n) {
    const std::uint64_t t = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x = g();
    while (x < t) x = g();
    return x % n;
}

}  // namespace bitdis
