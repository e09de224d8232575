#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace orgnet {

using Rng = std::mt19937_64;

/// Independent generator for one named purpose ("init", "batching", "noise",
/// "perturbation", ...) derived from a run's root seed. Adding draws to one
/// stream never shifts the draws of another.
inline Rng substream(std::uint64_t root_seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    // splitmix64 finalizer over the combined value
    std::uint64_t z = root_seed ^ (h + 0x9e3779b97f4a7c15ULL + (root_seed << 6) + (root_seed >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(z);
}

}  // namespace orgnet
