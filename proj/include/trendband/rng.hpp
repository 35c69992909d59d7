#pragma once

#include <cstdint>
#include <random>

namespace trendband {

using Rng = std::mt19937_64;

// splitmix64 finalizer (Steele/Lea/Flood). All substream derivation goes
// through this mixer so that parallel and serial runs draw identical streams:
// stream identity is a pure function of (seed, stream id), never of
// scheduling order.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

// Fixed stream tags. Replicate / repetition indices are offset past these.
inline constexpr std::uint64_t kStreamErrors = 1;
inline constexpr std::uint64_t kStreamMissing = 2;
inline constexpr std::uint64_t kStreamBootstrap = 3;
inline constexpr std::uint64_t kStreamReplicateBase = 1000;

}  // namespace trendband
