#pragma once

// Skew-normal distribution (Azzalini 1985) parameterized by location phi,
// scale omega and delta = lambda/sqrt(1+lambda^2) in (-1,1):
//   pdf(x) = (2/omega) dnorm(z) pnorm(lambda z),  z = (x - phi)/omega
// Moments:
//   mean     = phi + omega delta sqrt(2/pi)
//   variance = omega^2 (1 - 2 delta^2 / pi)
//   skewness = (4 - pi)/2 * (delta sqrt(2/pi))^3 / (1 - 2 delta^2/pi)^{3/2}
// The CDF is evaluated by adaptive Gauss-Kronrod integration of the density.

#include <cmath>
#include <stdexcept>

#include "gbp/math/distributions.hpp"
#include "gbp/math/quadrature.hpp"

namespace gbp {

struct SkewNormalParams {
  double location = 0.0;
  double scale = 1.0;
  double delta = 0.0;  // in (-1, 1)

  void validate() const {
    if (!(scale > 0.0)) throw std::domain_error("skew_normal: scale must be positive");
    if (!(std::fabs(delta) < 1.0))
      throw std::domain_error("skew_normal: |delta| must be < 1");
  }
};

inline double skew_normal_pdf(double x, const SkewNormalParams& p) {
  const double lambda = p.delta / std::sqrt(1.0 - p.delta * p.delta);
  const double z = (x - p.location) / p.scale;
  return 2.0 / p.scale * normal_pdf(z) * normal_cdf(lambda * z);
}

inline double skew_normal_mean(const SkewNormalParams& p) {
  return p.location + p.scale * p.delta * std::sqrt(2.0 / pi);
}

inline double skew_normal_var(const SkewNormalParams& p) {
  return p.scale * p.scale * (1.0 - 2.0 * p.delta * p.delta / pi);
}

inline double skew_normal_cdf(double x, const SkewNormalParams& p) {
  p.validate();
  // integrate the shorter tail; the density mass beyond 14 scales is < 1e-40
  const double span = 14.0 * p.scale;
  if (x <= p.location - span) return 0.0;
  if (x >= p.location + span) return 1.0;
  auto f = [&](double t) { return skew_normal_pdf(t, p); };
  if (x <= p.location)
    return integrate(f, p.location - span, x, 1e-11);
  return 1.0 - integrate(f, x, p.location + span, 1e-11);
}

inline double skew_normal_quantile(double q, const SkewNormalParams& p) {
  p.validate();
  if (!(q > 0.0) || !(q < 1.0))
    throw std::domain_error("skew_normal_quantile: q must be in (0,1)");
  double lo = p.location - 14.0 * p.scale;
  double hi = p.location + 14.0 * p.scale;
  // Newton from the matching normal quantile, bisection safeguarded
  double mean = skew_normal_mean(p);
  double sd = std::sqrt(skew_normal_var(p));
  double x = mean + sd * normal_quantile(q);
  if (!(x > lo) || !(x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double f = skew_normal_cdf(x, p) - q;
    if (f > 0.0) hi = x; else lo = x;
    if (std::fabs(f) < 1e-11) break;
    double dens = skew_normal_pdf(x, p);
    double xn = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x) break;
    x = xn;
  }
  return x;
}

// Result of matching (c1, c2, c3) = (mean, variance, third central moment).
struct SkewNormalMatch {
  SkewNormalParams params;
  bool clamped = false;  // skewness exceeded the attainable bound
};

// Invert the moment equations. delta^2 = (pi/2) |g|^{2/3} /
// (|g|^{2/3} + ((4-pi)/2)^{2/3}) with g the standardized skewness, clamping
// |delta| at 0.995 when |g| exceeds the family's bound (~0.99527).
inline SkewNormalMatch skew_normal_from_cumulants(double c1, double c2, double c3) {
  if (!(c2 > 0.0))
    throw std::domain_error("skew_normal_from_cumulants: variance must be positive");
  SkewNormalMatch out;
  const double g = c3 / (c2 * std::sqrt(c2));
  const double gmax = 0.99527174643;
  double delta;
  if (std::fabs(g) >= gmax) {
    delta = (g > 0 ? 1.0 : -1.0) * 0.995;
    out.clamped = true;
  } else {
    double u = std::pow(std::fabs(g), 2.0 / 3.0);
    double cpow = std::pow((4.0 - pi) / 2.0, 2.0 / 3.0);
    double d2 = 0.5 * pi * u / (u + cpow);
    delta = (g >= 0 ? 1.0 : -1.0) * std::sqrt(d2);
  }
  double omega = std::sqrt(c2 / (1.0 - 2.0 * delta * delta / pi));
  double phi = c1 - omega * delta * std::sqrt(2.0 / pi);
  out.params = {phi, omega, delta};
  return out;
}

}  // namespace gbp
