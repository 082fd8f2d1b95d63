#pragma once

// Portable random helpers: the standard distributions are implementation
// defined, these are not, so seeded outputs match across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace octbd::detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal deviate (Box-Muller, one value per call).
inline double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace octbd::detail
