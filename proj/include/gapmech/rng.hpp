#pragma once

#include <cstdint>

namespace gapmech {

/// Named substreams derived from one 64-bit seed.
enum class Stream : std::uint64_t {
  kSetDraw = 1,    // per-bin categorical draw of a set
  kRetention = 2,  // per-(bin, item) keep/withdraw coin of the simplified rounder
  kGenerate = 3,   // instance generation
  kSample = 4,     // per-sample seeds of Monte Carlo loops
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based hash of (seed, stream, a, b). Every draw is a pure function of
/// its coordinates, so results do not depend on evaluation order or threading.
inline constexpr std::uint64_t counter_hash(std::uint64_t seed, Stream stream, std::uint64_t a,
                                            std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

/// Uniform double in [0, 1) with 53 random bits.
inline constexpr double counter_uniform(std::uint64_t seed, Stream stream, std::uint64_t a,
                                        std::uint64_t b = 0) {
  return static_cast<double>(counter_hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

/// Small sequential generator for test-data construction (splitmix64 walk).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace gapmech
