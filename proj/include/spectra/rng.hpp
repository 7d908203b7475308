#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace spectra {

/// Counter-based RNG (SplitMix64 output function over a keyed counter).
///
/// Streams are pure functions of (key, counter), so a trial scheduled on any
/// worker thread draws exactly the same variates: fork() derives an
/// independent child stream from a tag, and nothing is shared between
/// streams. This is the reproducibility contract the experiment runner
/// relies on when --jobs changes.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeySalt)), ctr_(0) {}

  /// Derive an independent substream; does not disturb this stream.
  Rng fork(std::uint64_t tag) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(tag ^ kForkSalt));
    child.ctr_ = 0;
    return child;
  }
  Rng fork(std::string_view tag) const { return fork(fnv1a(tag)); }

  std::uint64_t next() { return mix(key_ + (++ctr_) * kGolden); }

  /// Uniform in [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); n = 0 is invalid.
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling keeps the draw exactly uniform
    std::uint64_t threshold = -n % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal (Box-Muller; second variate cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // URBG interface so standard algorithms can consume the stream.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }
  result_type operator()() { return next(); }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    return h;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kKeySalt = 0x8E31A2B019F7C3D5ull;
  static constexpr std::uint64_t kForkSalt = 0xD6E8FEB86659FD93ull;

  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace spectra
