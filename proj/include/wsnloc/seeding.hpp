#pragma once

#include <cstdint>

namespace wsnloc {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-trial seed: splitmix64(base ^ splitmix64(index)). Any trial can be
// re-run in isolation from (base, index).
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index));
}

}  // namespace wsnloc
