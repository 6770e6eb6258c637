#pragma once

#include <cmath>
#include <cstdint>

namespace s3kf {

/// Counter-based pseudo-random stream (splitmix64 core).
///
/// A stream is addressed by (seed, a, b): the same triple always yields the
/// same sequence, independent of any other stream. This keeps simulation
/// output bit-reproducible even when frames or targets are generated in a
/// different order.
class CounterRng {
 public:
  CounterRng() = default;

  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Derive an independent substream from a master seed and two labels
  /// (e.g. frame index and target id).
  static CounterRng derive(uint64_t seed, uint64_t a, uint64_t b = 0) {
    CounterRng r;
    r.state_ = mix(seed) ^ mix(a * 0xA24BAED4963EE407ull + 1) ^
               mix(b * 0x9FB21C651E98DF25ull + 2);
    return r;
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no cached second value; draws two
  /// uniforms per call so the stream position is input-independent).
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    // Avoid log(0).
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  /// Poisson count by Knuth's method; intended for small lambda.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  uint64_t state_ = 0;
};

}  // namespace s3kf
