#pragma once

// CDFs and quantiles for the Normal, Gamma and Beta families. Quantiles use
// Newton iterations safeguarded by bisection on a bracketing interval.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gbp/math/special.hpp"

namespace gbp {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

inline double normal_cdf(double x, double mean, double sd) {
  return normal_cdf((x - mean) / sd);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / 2.50662827463100050242;
}

// Inverse standard normal CDF: Acklam's rational approximation refined with
// two Halley steps, giving full double accuracy.
inline double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);  // Halley
  }
  return x;
}

inline double normal_quantile(double p, double mean, double sd) {
  return mean + sd * normal_quantile(p);
}

// Gamma distribution with shape/rate parameterization.
inline double gamma_cdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("gamma_cdf: shape and rate must be positive");
  if (x <= 0.0) return 0.0;
  return reg_inc_gamma(shape, rate * x);
}

inline double gamma_log_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         log_gamma(shape);
}

namespace detail {
// Newton with bisection safeguard for a monotone CDF on (lo, hi).
template <class Cdf, class LogPdf>
double invert_cdf(Cdf&& cdf, LogPdf&& log_pdf, double p, double lo, double hi,
                  double x0) {
  double x = x0;
  if (!(x > lo) || !(x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = cdf(x) - p;
    if (f > 0.0) hi = x; else lo = x;
    if (std::fabs(f) < 1e-13) break;
    double lp = log_pdf(x);
    double step = std::isfinite(lp) ? f / std::exp(lp)
                                    : std::numeric_limits<double>::infinity();
    double xn = x - step;
    if (!(xn > lo) || !(xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
    if (xn == x || hi - lo < 1e-15 * (std::fabs(hi) + 1.0)) break;
    x = xn;
  }
  return x;
}
}  // namespace detail

inline double gamma_quantile(double p, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("gamma_quantile: shape and rate must be positive");
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("gamma_quantile: p must be in (0,1)");
  // Wilson-Hilferty start
  double z = normal_quantile(p);
  double w = 1.0 - 1.0 / (9.0 * shape) + z / (3.0 * std::sqrt(shape));
  double x0 = shape * w * w * w / rate;
  if (!(x0 > 0.0)) x0 = shape / rate * 1e-3;
  double hi = shape / rate;
  while (gamma_cdf(hi, shape, rate) < p) hi *= 2.0;
  return detail::invert_cdf([&](double x) { return gamma_cdf(x, shape, rate); },
                            [&](double x) { return gamma_log_pdf(x, shape, rate); },
                            p, 0.0, hi, x0);
}

inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return reg_inc_beta(x, a, b);
}

inline double beta_log_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

inline double beta_quantile(double p, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("beta_quantile: parameters must be positive");
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("beta_quantile: p must be in (0,1)");
  return detail::invert_cdf([&](double x) { return beta_cdf(x, a, b); },
                            [&](double x) { return beta_log_pdf(x, a, b); },
                            p, 0.0, 1.0, a / (a + b));
}

}  // namespace gbp
