#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>

namespace dgtd {

/// Seeded random source. Draws are derived from raw mt19937_64 output so a
/// given seed yields the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from a cumulative distribution whose last entry is ~1.
  int categorical(std::span<const double> cdf) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform());
    const auto last = static_cast<std::ptrdiff_t>(cdf.size()) - 1;
    return static_cast<int>(std::min(it - cdf.begin(), last));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dgtd
