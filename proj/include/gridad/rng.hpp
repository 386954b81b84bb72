#pragma once

#include <cstdint>
#include <random>

namespace gridad {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Child seeds are `derive_seed(master, index)`, so a
/// scenario's seed depends only on the master seed and its position in the
/// batch, never on scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

}  // namespace gridad
