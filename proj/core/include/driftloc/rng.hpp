#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace driftloc {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent child stream seed for (master, stream ids...). Used so every
/// scenario, tree and repeat owns its own PRNG regardless of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master) noexcept { return splitmix64(master); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, Rest... rest) noexcept {
    return derive_seed(splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL)),
                       static_cast<std::uint64_t>(rest)...);
}

/// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace driftloc
