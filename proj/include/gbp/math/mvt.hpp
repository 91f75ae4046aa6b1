#pragma once

// Multivariate t-distribution with 4 degrees of freedom: location xi and
// scale matrix S (covariance 2S). Density:
//   f(v) = Gamma((4+m)/2) / (Gamma(2) (4 pi)^{m/2} |S|^{1/2})
//            * (1 + D^2/4)^{-(4+m)/2},   D^2 = (v-xi)' S^{-1} (v-xi)

#include <cmath>

#include "gbp/math/linalg.hpp"
#include "gbp/math/sampling.hpp"
#include "gbp/math/special.hpp"

namespace gbp {

inline double mvt4_log_density(const Vec& v, const Vec& xi, const Mat& s) {
  const std::size_t m = v.size();
  Mat l = cholesky(s);  // throws matrix_error if S is not PD
  Vec diff(m);
  for (std::size_t i = 0; i < m; ++i) diff[i] = v[i] - xi[i];
  Vec w = chol_solve(l, diff);
  double d2 = dot(diff, w);
  double md = static_cast<double>(m);
  return log_gamma(0.5 * (4.0 + md)) - log_gamma(2.0) - 0.5 * md * std::log(4.0 * pi) -
         0.5 * chol_log_det(l) - 0.5 * (4.0 + md) * std::log1p(0.25 * d2);
}

// Draw from t4(xi, S) given the Cholesky factor of S.
inline Vec mvt4_sample(RngStream& stream, const Vec& xi, const Mat& chol_s) {
  const std::size_t m = xi.size();
  Vec z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = sample_normal(stream);
  double w = sample_chisq(stream, 4.0) / 4.0;
  double scale = 1.0 / std::sqrt(w);
  Vec out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += chol_s(i, j) * z[j];
    out[i] = xi[i] + scale * s;
  }
  return out;
}

}  // namespace gbp
