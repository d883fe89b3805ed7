#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace thinset {

// splitmix64 finalizer; used to derive independent streams from
// (seed, counter) pairs so results do not depend on evaluation order.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b) noexcept {
  return stream_seed(stream_seed(seed, a), b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(stream_seed(seed, stream));
}

/// Uniform double in [0, 1) built from the top 53 bits; identical across
/// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (portable, deterministic).
inline double standard_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace thinset
