#pragma once

// Skew-t distribution of Jones & Faddy (2003) with location l, scale sigma
// and positive shape parameters a, b. The density of the standardized
// variable t = (x - l)/sigma is
//   f(t) = C^{-1} (1 + t/s)^{a+1/2} (1 - t/s)^{b+1/2},  s = sqrt(a+b+t^2)
//   C    = 2^{a+b-1} B(a,b) sqrt(a+b)
// Tails follow power laws t^{-(2a+1)} (left) and t^{-(2b+1)} (right); a > b
// skews right. A draw is l + sigma sqrt(a+b)(2T-1)/(2 sqrt(T(1-T))) with
// T ~ Beta(a, b).

#include <cmath>
#include <stdexcept>

#include "gbp/math/sampling.hpp"
#include "gbp/math/special.hpp"

namespace gbp {

struct SkewTParams {
  double location = 0.0;
  double scale = 1.0;
  double a = 1.0;
  double b = 1.0;

  void validate() const {
    if (!(scale > 0.0)) throw std::domain_error("skew_t: scale must be positive");
    if (!(a > 0.0) || !(b > 0.0))
      throw std::domain_error("skew_t: shape parameters must be positive");
  }
};

// mode of the standardized density; the distribution's mode is
// location + scale * skew_t_mode_offset(a, b)
inline double skew_t_mode_offset(double a, double b) {
  return (a - b) * std::sqrt(a + b) / std::sqrt((2.0 * a + 1.0) * (2.0 * b + 1.0));
}

inline double skew_t_log_density(double x, const SkewTParams& p) {
  p.validate();
  const double t = (x - p.location) / p.scale;
  const double s = std::sqrt(p.a + p.b + t * t);
  const double log_norm = (p.a + p.b - 1.0) * std::log(2.0) + log_beta(p.a, p.b) +
                          0.5 * std::log(p.a + p.b) + std::log(p.scale);
  return (p.a + 0.5) * std::log1p(t / s) + (p.b + 0.5) * std::log1p(-t / s) - log_norm;
}

inline double sample_skew_t(RngStream& stream, const SkewTParams& p) {
  p.validate();
  const double t = sample_beta(stream, p.a, p.b);
  return p.location +
         p.scale * std::sqrt(p.a + p.b) * (2.0 * t - 1.0) / (2.0 * std::sqrt(t * (1.0 - t)));
}

}  // namespace gbp
