#pragma once
#include <cmath>
#include <cstdint>

// SplitMix64-based deterministic randomness. Every stochastic piece of the
// library draws through these helpers so that runs are reproducible across
// platforms and so that sub-streams (per device, per band, per placement)
// stay stable when other streams are added or removed.

namespace wpmec::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output finalizer (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Key for an independent sub-stream identified by (a, b) under a root seed.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b) {
  return mix64(mix64(seed ^ mix64(a + 1)) ^ mix64((b + 1) * 0x51ED2701u));
}

/// Counter-advanced SplitMix64 stream: draw n is a pure function of
/// (key, n), so streams can be replayed or skipped without shared state.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (counter_++) * kGolden); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Exp(1) via inverse CDF on the uniform output.
  double next_exp() { return -std::log1p(-next_unit()); }

  /// Standard normal via Box-Muller (consumes two uniforms).
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    // avoid log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wpmec::rng
