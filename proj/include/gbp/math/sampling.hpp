#pragma once

// Samplers for the distributions the models need. All of them are
// deterministic functions of the stream state and the parameters.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "gbp/math/distributions.hpp"
#include "gbp/math/rng.hpp"

namespace gbp {

// standard normal by inversion (one uniform per draw)
inline double sample_normal(RngStream& stream) {
  return normal_quantile(stream.uniform());
}

inline double sample_normal(RngStream& stream, double mean, double sd) {
  if (!(sd >= 0.0)) throw std::domain_error("sample_normal: sd must be >= 0");
  return mean + sd * sample_normal(stream);
}

// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
inline double sample_gamma(RngStream& stream, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("sample_gamma: shape and rate must be positive");
  if (shape < 1.0) {
    double u = stream.uniform();
    return sample_gamma(stream, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = stream.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

inline double sample_beta(RngStream& stream, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("sample_beta: parameters must be positive");
  double x = sample_gamma(stream, a, 1.0);
  double y = sample_gamma(stream, b, 1.0);
  double s = x + y;
  if (s <= 0.0) return a / (a + b);  // both underflowed; vanishing probability
  return x / s;
}

inline std::int64_t sample_poisson(RngStream& stream, double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("sample_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  // split large means so the Knuth product never underflows
  std::int64_t total = 0;
  while (mean > 30.0) {
    double half = mean * 0.5;
    total += sample_poisson(stream, half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  double prod = stream.uniform();
  std::int64_t count = 0;
  while (prod > limit) {
    prod *= stream.uniform();
    ++count;
  }
  return total + count;
}

inline std::int64_t sample_binomial(RngStream& stream, std::int64_t n, double p) {
  if (n < 0) throw std::domain_error("sample_binomial: n must be >= 0");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::domain_error("sample_binomial: p must be in [0,1]");
  if (p == 0.0 || n == 0) return 0;
  if (p == 1.0) return n;
  std::int64_t total = 0;
  while (n > 64) {
    std::int64_t half = n / 2;
    total += sample_binomial(stream, half, p);
    n -= half;
  }
  for (std::int64_t i = 0; i < n; ++i)
    if (stream.uniform() < p) ++total;
  return total;
}

// chi-square with df degrees of freedom
inline double sample_chisq(RngStream& stream, double df) {
  return sample_gamma(stream, 0.5 * df, 0.5);
}

}  // namespace gbp
