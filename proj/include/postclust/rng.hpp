#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace postclust {

/// Seeded generator with platform-independent derived distributions.
///
/// std::mt19937_64's raw sequence is fixed by the standard, but the standard
/// distributions are not, so sampling helpers are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). `n` must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF sampler over a fixed weight vector.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);

  /// Weights proportional to 1 / (rank + 1)^exponent.
  static DiscreteSampler zipf(std::size_t n, double exponent);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace postclust
