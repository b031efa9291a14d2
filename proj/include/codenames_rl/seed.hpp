#pragma once

#include <cstdint>

namespace codenames_rl {

/// SplitMix64 finalizer. Derives independent stream seeds from a master
/// seed: stream i of master m is splitmix64(m + i).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) { return splitmix64(master + stream); }

}  // namespace codenames_rl
