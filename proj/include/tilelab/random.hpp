#pragma once

// Seeded random helpers. Distributions are hand-rolled on top of mt19937_64 so
// that streams are identical across standard library implementations.

#include <cstdint>
#include <random>

namespace tilelab {

using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

/// Number of fair-coin failures before the first success.
inline int geometric_half(Rng& rng, int cap) {
  int g = 0;
  while (g < cap && coin(rng)) ++g;
  return g;
}

/// Counter-based generator for reproducible parallel sampling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent child seed for trial `index`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ED27B3A9C1ULL));
}

}  // namespace tilelab
