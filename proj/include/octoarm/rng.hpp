#pragma once

#include <cmath>
#include <cstdint>

#include "octoarm/core.hpp"

namespace octoarm {

// Counter-based random numbers.  Every draw is a pure function of
// (seed, stream, counter), so any consumer can be evaluated out of order or
// in parallel without changing the values it sees.  The mixer is the
// splitmix64 finalizer, which passes the usual statistical batteries when
// used as a hash of distinct inputs.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for trial `index` of a sweep; children of distinct indices are
// decorrelated even for adjacent master seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(0x632be59bd9b4e019ULL + index));
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed) ^ mix64(0x9e3779b97f4a7c15ULL ^ stream))) {}

  std::uint64_t bits(std::uint64_t counter) const { return mix64(key_ ^ mix64(counter)); }

  // Uniform in [0,1): top 53 bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  // Standard normal via Box-Muller; consumes counters 2k and 2k+1.
  double normal(std::uint64_t counter) const {
    // u1 in (0,1] so the log is finite.
    double u1 = static_cast<double>((bits(2 * counter) >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform(2 * counter + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t key_;
};

// Stream ids used across the project; fixed so that output is reproducible
// given (seed, stream, counter) alone.
namespace streams {
inline constexpr std::uint64_t kCurvatureNoise = 1;
inline constexpr std::uint64_t kConcentrationNoise = 2;
inline constexpr std::uint64_t kInitTheta = 3;
inline constexpr std::uint64_t kInitAlpha = 4;
inline constexpr std::uint64_t kInitMu = 5;
inline constexpr std::uint64_t kGeneral = 6;
}  // namespace streams

}  // namespace octoarm
