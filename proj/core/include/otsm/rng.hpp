#pragma once

#include <cstdint>
#include <random>

namespace otsm {

/// splitmix64 step; used to derive independent per-trial seed streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of stream `base`, scheduling-independent.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace otsm
