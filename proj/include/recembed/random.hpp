#pragma once

#include <cstdint>
#include <random>

namespace recembed {

/// Every randomized operation takes one of these; same seed and inputs give
/// bit-identical output.
struct RandomSeed {
  std::uint64_t value = 0;
};

using Rng = std::mt19937_64;

/// Deterministically derives an independent child seed for `stream`.
/// splitmix64 finalizer over (seed, stream).
inline RandomSeed derive_seed(RandomSeed seed, std::uint64_t stream) {
  std::uint64_t z = seed.value + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return RandomSeed{z ^ (z >> 31)};
}

inline Rng make_rng(RandomSeed seed) { return Rng(seed.value); }

/// Uniform double in [0, 1) from the raw engine bits. Unlike
/// std::uniform_real_distribution the result does not depend on the
/// standard library implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n) via rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Standard normal via Box-Muller on uniform01.
double standard_normal(Rng& rng);

}  // namespace recembed
