#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mansel {

/// Portable 64-bit generator: xoshiro256++ seeded through SplitMix64.
/// Fixed here (rather than <random> engines plus distributions) so that
/// seeded runs and golden files reproduce bit-exactly on any platform.
/// Normal deviates come from Box-Muller on the raw uniform stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Derive an independent, reproducible stream for a named sub-task.
  Rng stream(std::string_view tag, uint64_t index = 0) const {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (char c : tag) h = (h ^ static_cast<uint64_t>(c)) * 0x100000001b3ULL;
    h ^= index + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    return Rng(state_[0] ^ h);
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    // Rejection-free enough for test-scale n; bias < 2^-53 ignored.
    return static_cast<uint64_t>(uniform() * static_cast<double>(n));
  }

  /// Standard normal deviate (Box-Muller, second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mansel
