#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nqp {

// splitmix64 finalizer: full-avalanche 64-bit mixing step.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based PRF: the output depends only on (seed, stream, counter), so any
// draw can be produced independently, in any order, on any thread.  Streams keyed
// by phase index make per-phase data reproducible regardless of generation order.
inline std::uint64_t prf(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

inline double to_unit(std::uint64_t z) {          // [0, 1)
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}
inline double to_unit_pos(std::uint64_t z) {      // (0, 1]
  return (static_cast<double>(z >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return to_unit(prf(seed, stream, counter));
}

// Standard normal draw i via Box-Muller (cosine branch); consumes counters 2i, 2i+1.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
  const double u1 = to_unit_pos(prf(seed, stream, 2 * i));
  const double u2 = to_unit(prf(seed, stream, 2 * i + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace nqp
