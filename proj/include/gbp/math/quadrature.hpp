#pragma once

// Adaptive Gauss-Kronrod (7-15) quadrature with interval bisection.

#include <cmath>
#include <vector>

#include "gbp/errors.hpp"

namespace gbp {

namespace detail {
// Kronrod-15 abscissae/weights and embedded Gauss-7 weights (QUADPACK dqk15).
inline constexpr double gk_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
void gk15(F&& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fc = f(c);
  double resk = gk_wk[7] * fc;
  double resg = gk_wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double dx = h * gk_x[i];
    double fsum = f(c - dx) + f(c + dx);
    resk += gk_wk[i] * fsum;
    if (i % 2 == 1) resg += gk_wg[i / 2] * fsum;
  }
  kronrod = resk * h;
  err = std::fabs((resk - resg) * h);
}
}  // namespace detail

// Integrate f on [a, b] to an absolute tolerance.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                 int max_intervals = 2000) {
  if (a == b) return 0.0;
  struct Seg { double a, b, value, err; };
  std::vector<Seg> segs;
  double v, e;
  detail::gk15(f, a, b, v, e);
  segs.push_back({a, b, v, e});
  double total_err = e;
  while (total_err > abs_tol && static_cast<int>(segs.size()) < max_intervals) {
    // split the segment with the largest error
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Seg s = segs[worst];
    double mid = 0.5 * (s.a + s.b);
    if (mid == s.a || mid == s.b) break;  // interval exhausted
    Seg left{s.a, mid, 0, 0}, right{mid, s.b, 0, 0};
    detail::gk15(f, left.a, left.b, left.value, left.err);
    detail::gk15(f, right.a, right.b, right.value, right.err);
    total_err += left.err + right.err - s.err;
    segs[worst] = left;
    segs.push_back(right);
  }
  double sum = 0.0;
  for (const Seg& s : segs) sum += s.value;
  return sum;
}

}  // namespace gbp
