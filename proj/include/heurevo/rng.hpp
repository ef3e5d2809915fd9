#pragma once

// Portable random source. Every draw in the engine goes through Pcg32 so that
// instance files and run journals reproduce bit-for-bit on any platform; the
// std:: distributions are implementation-defined and are never used here.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

namespace heurevo {

/// PCG32 (XSH-RR output, 64-bit LCG state).
///
/// State transition: state = state * 6364136223846793005 + inc, where inc is
/// (stream << 1) | 1. Output: xorshift-high followed by a random rotation of
/// the old state. Seeding follows the reference pcg32_srandom_r routine.
class Pcg32 {
 public:
  using result_type = std::uint32_t;

  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kDefaultStream = 1442695040888963407ULL;

  explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL,
                 std::uint64_t stream = kDefaultStream >> 1) {
    reseed(seed, stream);
  }

  void reseed(std::uint64_t seed, std::uint64_t stream) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    step();
    state_ += seed;
    step();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t old = state_;
    step();
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return (hi << 32u) | lo;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint32_t bounded(std::uint32_t bound) {
    if (bound <= 1) return 0;
    const std::uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      const std::uint32_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint32_t>(hi - lo + 1)));
  }

  /// Weibull(shape, scale) by inversion.
  double weibull(double shape, double scale) {
    const double u = uniform01();
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
  }

  std::uint64_t state() const { return state_; }
  std::uint64_t increment() const { return inc_; }

  /// Restores a generator captured with state()/increment().
  static Pcg32 from_raw(std::uint64_t state, std::uint64_t inc) {
    Pcg32 g;
    g.state_ = state;
    g.inc_ = inc | 1u;
    return g;
  }

  friend bool operator==(const Pcg32&, const Pcg32&) = default;

 private:
  void step() { state_ = state_ * kMultiplier + inc_; }

  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

/// Draws index i with probability weights[i] / sum(weights). Weights must be
/// non-negative with a positive sum.
inline std::size_t sample_index(std::span<const double> weights, Pcg32& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cumulative += weights[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  return last_positive;
}

}  // namespace heurevo
