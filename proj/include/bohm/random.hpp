#pragma once

// Seed derivation for order-independent parallel sampling.
//
// Every consumer (sample k of a sample set, trial k of an average) draws
// from its own engine seeded with substream_seed(seed, k), so results never
// depend on which worker ran which index.

#include <cstdint>
#include <random>

namespace bohm {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Engine for one substream. std::mt19937_64 with a SplitMix-derived seed.
using Engine = std::mt19937_64;

[[nodiscard]] inline Engine make_engine(std::uint64_t seed, std::uint64_t index) {
    return Engine(substream_seed(seed, index));
}

}  // namespace bohm
