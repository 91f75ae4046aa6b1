#pragma once

// 1-D bracketed maximization (golden section + parabolic steps), bracket
// expansion, safeguarded curvature estimation, and a damped multivariate
// Newton maximizer.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>

#include "gbp/errors.hpp"
#include "gbp/math/linalg.hpp"

namespace gbp {

struct Bracket {
  double lo, mid, hi;  // f(mid) > f(lo) and f(mid) > f(hi)
};

// Expand outward from x0 until the function decreases on both ends.
// Throws fit_error when no interior maximum exists inside [limit_lo, limit_hi].
template <class F>
Bracket expand_bracket(F&& f, double x0, double step = 1.0,
                       double limit_lo = -60.0, double limit_hi = 60.0) {
  double mid = x0, fmid = f(mid);
  double lo = x0 - step, hi = x0 + step;
  double flo = f(lo), fhi = f(hi);
  // walk uphill if needed, growing the step
  double grow = 1.6;
  while (flo >= fmid || fhi >= fmid) {
    if (flo >= fmid) {
      hi = mid; fhi = fmid;
      mid = lo; fmid = flo;
      step *= grow;
      lo = mid - step;
      if (lo < limit_lo)
        throw fit_error("no interior maximum in the search range; "
                        "check posterior propriety or the data");
      flo = f(lo);
    } else {
      lo = mid; flo = fmid;
      mid = hi; fmid = fhi;
      step *= grow;
      hi = mid + step;
      if (hi > limit_hi)
        throw fit_error("no interior maximum in the search range; "
                        "check posterior propriety or the data");
      fhi = f(hi);
    }
  }
  return {lo, mid, hi};
}

struct MaxResult {
  double x;
  double fx;
  int evals;
};

// Brent-style maximizer on a bracket (golden section with parabolic steps).
template <class F>
MaxResult brent_max(F&& f, const Bracket& br, double xtol = 1e-8, int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double a = br.lo, b = br.hi;
  double x = br.mid, w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evals = 1;
  for (int it = 0; it < max_iter; ++it) {
    double xm = 0.5 * (a + b);
    double tol1 = xtol * std::fabs(x) + 1e-12;
    double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      double etemp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    double u = (std::fabs(d) >= tol1) ? x + d : x + (d >= 0 ? tol1 : -tol1);
    double fu = f(u);
    ++evals;
    if (fu >= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu >= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu >= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

// Central second difference with one Richardson extrapolation step.
template <class F>
double second_derivative(F&& f, double x, double h) {
  double f0 = f(x);
  auto d2 = [&](double hh) {
    return (f(x + hh) - 2.0 * f0 + f(x - hh)) / (hh * hh);
  };
  double coarse = d2(h);
  double fine = d2(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

struct NewtonOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;
};

struct NewtonResult {
  Vec x;
  double fx = 0.0;
  Mat neg_hessian;  // at x
  int iters = 0;
  bool converged = false;
};

// Damped Newton ascent. `fgh(x, grad, hess)` returns the objective value and
// fills gradient/Hessian. Non-PD Hessians fall back to a ridged solve. A
// trial step is accepted when it improves the objective OR contracts the
// gradient norm; near the optimum the improvement sinks below evaluation
// noise while Newton still contracts the gradient quadratically, and callers
// (Laplace log-det) need the tight iterate, not just the tight value.
template <class FGH>
NewtonResult newton_max(FGH&& fgh, Vec x0, const NewtonOptions& opts = {}) {
  NewtonResult res;
  const std::size_t n = x0.size();
  Vec x = std::move(x0);
  Vec g(n), g_try(n);
  Mat h(n, n), h_try(n, n);
  auto max_abs = [](const Vec& v) {
    double m = 0.0;
    for (double vi : v) m = std::max(m, std::fabs(vi));
    return m;
  };
  double fx = fgh(x, g, h);
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iters = it + 1;
    const double gmax = max_abs(g);
    if (gmax < opts.grad_tol) {
      res.converged = true;
      break;
    }
    // solve (-H) step = g, ridging if needed
    Mat nh(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) nh(i, j) = -h(i, j);
    Vec step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      try {
        Mat trial = nh;
        if (ridge > 0.0)
          for (std::size_t i = 0; i < n; ++i) trial(i, i) += ridge;
        step = chol_solve(cholesky(trial), g);
        break;
      } catch (const matrix_error&) {
        ridge = ridge == 0.0 ? 1e-6 : ridge * 10.0;
      }
    }
    if (step.empty()) throw fit_error("newton_max: Hessian could not be stabilized");
    double t = 1.0;
    Vec xn(n);
    double fn = fx;
    bool accepted = false;
    for (int halving = 0; halving < 48; ++halving) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * step[i];
      fn = fgh(xn, g_try, h_try);
      if (fn > fx || max_abs(g_try) < 0.5 * gmax) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = gmax < 1e3 * opts.grad_tol;
      break;
    }
    x = xn;
    fx = fn;
    g = g_try;
    h = h_try;
  }
  if (!res.converged) res.converged = max_abs(g) < 1e2 * opts.grad_tol;
  res.x = std::move(x);
  res.fx = fx;
  Mat nh(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) nh(i, j) = -h(i, j);
  res.neg_hessian = nh;
  return res;
}

}  // namespace gbp
