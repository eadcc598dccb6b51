#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace edd {

// mt19937_64 is fully specified by the standard; the draws below avoid the
// implementation-defined std distributions so sequences match across toolchains.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Uniform in [0, n). n must be > 0.
inline std::size_t uniform_below(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

// Uniform in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(rng, static_cast<std::size_t>(hi - lo + 1)));
}

}  // namespace edd
