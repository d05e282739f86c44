#pragma once

// Counter-based random streams.
//
// A stream is identified by (seed, stream index). Draw j of a stream is
// mix(key + (j + 1) * golden) where key = mix(mix(seed) ^ (stream * golden'))
// and mix is the SplitMix64 finalizer. A draw therefore depends only on the
// seed, the stream index and the draw position, never on which thread asks.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace wmv {

class CounterRng {
public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static constexpr std::uint64_t kStreamMul = 0xd1b54a32d192ed03ull;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed) ^ (stream * kStreamMul))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t position() const { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Below this many trials a binomial draw is a sum of Bernoulli draws.
inline constexpr long long kDirectBinomialLimit = 256;

inline long long sample_binomial(long long m, double p, CounterRng& rng) {
  if (m <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return m;
  if (m <= kDirectBinomialLimit) {
    long long k = 0;
    for (long long j = 0; j < m; ++j) k += rng.bernoulli(p);
    return k;
  }
  return std::binomial_distribution<long long>(m, p)(rng);
}

inline double sample_standard_normal(CounterRng& rng) {
  // Box-Muller, cosine branch only
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Gamma(shape, 1) by Marsaglia-Tsang, with the u^(1/shape) boost for shape < 1.
inline double sample_gamma(double shape, CounterRng& rng) {
  if (shape < 1.0) return sample_gamma(shape + 1.0, rng) * std::pow(rng.uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Beta(alpha, beta) on the open interval (0,1). Beta(1,1) is one uniform draw.
inline double sample_beta(double alpha, double beta, CounterRng& rng) {
  if (alpha == 1.0 && beta == 1.0) return rng.uniform();
  const double x = sample_gamma(alpha, rng);
  const double y = sample_gamma(beta, rng);
  double b = x / (x + y);
  if (!(b > 0.0)) b = std::numeric_limits<double>::min();
  if (!(b < 1.0)) b = std::nextafter(1.0, 0.0);
  return b;
}

}  // namespace wmv
