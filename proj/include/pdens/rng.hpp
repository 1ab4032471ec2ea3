#pragma once

#include <cstdint>

#include "pdens/normal.hpp"

namespace pdens {

// Counter-based generators: every draw is a pure function of
// (seed, stream, index), so parallel execution order cannot change results.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Uniform draw in the open interval (0,1).
inline double counter_uniform(uint64_t seed, uint64_t stream, uint64_t index) {
  uint64_t x = splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
  x = splitmix64(x + index);
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw via the inverse cdf of a counter uniform.
inline double counter_normal(uint64_t seed, uint64_t stream, uint64_t index) {
  return normal_inv_cdf(counter_uniform(seed, stream, index));
}

}  // namespace pdens
