#pragma once

// Marginal log likelihoods / log posteriors of the hyper-parameters with the
// random effects integrated out:
//   Gaussian:  y_j ~ N(x_j'beta, A + V_j)
//   Poisson:   y_j ~ NegBin  (Gamma prior integrated out)
//   Binomial:  y_j ~ BetaBin (Beta prior integrated out)
// plus the GLS profile for the Gaussian beta and the Laplace integration over
// beta for the Binomial model. Everything is computed in log space.

#include <cmath>
#include <cstddef>

#include "gbp/errors.hpp"
#include "gbp/math/linalg.hpp"
#include "gbp/math/optimize.hpp"
#include "gbp/math/special.hpp"
#include "gbp/model.hpp"

namespace gbp {

// Hyper-prior family f(r, beta) ∝ 1/(t + r)^{u+1}; the default (t,u) = (0,1)
// is the dr/r^2 prior. Applies to the Poisson/Binomial r only; the Gaussian
// A always carries a flat prior.
struct HyperPriorFamily {
  double t = 0.0;
  double u = 1.0;

  void validate() const {
    if (!(t >= 0.0) || !(u > 0.0))
      throw config_error("hyper-prior family needs t >= 0 and u > 0");
  }
};

inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// ---------------------------------------------------------------------------
// Gaussian

inline double gaussian_log_marginal(const Dataset& d, double A, const Vec& beta) {
  if (!(A > 0.0) && A != 0.0)
    throw std::domain_error("gaussian_log_marginal: A must be >= 0");
  double ll = 0.0;
  for (std::size_t j = 0; j < d.k(); ++j) {
    double mu = d.prior_known() ? d.prior_mean[j] : dot_row(d, j, beta);
    double s2 = A + d.V(j);
    double resid = d.y[j] - mu;
    ll += -0.5 * std::log(2.0 * pi * s2) - resid * resid / (2.0 * s2);
  }
  return ll;

}

struct GlsResult {
  Vec beta_hat;
  Mat sigma_hat;  // (X' D^{-1} X)^{-1}
};

// Weighted least squares with D = diag(V_j + A).
inline GlsResult gaussian_gls(const Dataset& d, double A) {
  const std::size_t k = d.k(), m = d.m();
  Mat xtx(m, m);
  Vec xty(m, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double w = 1.0 / (d.V(j) + A);
    for (std::size_t p = 0; p < m; ++p) {
      xty[p] += w * d.X(j, p) * d.y[j];
      for (std::size_t q = p; q < m; ++q) xtx(p, q) += w * d.X(j, p) * d.X(j, q);
    }
  }
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < p; ++q) xtx(p, q) = xtx(q, p);
  GlsResult res;
  Mat l = cholesky(xtx);  // matrix_error on singular systems
  res.beta_hat = chol_solve(l, xty);
  res.sigma_hat = inverse_spd(xtx);
  return res;
}

// log of the beta-integrated Gaussian marginal (flat prior on beta):
//   log ∫ L(A, beta) dbeta
//     = sum_j log N(y_j | x_j b^, A+V_j) + (m/2) log 2pi + 1/2 log |Sigma^|
// Reduces to the plain marginal when the prior mean is known.
inline double gaussian_integrated_log_marginal(const Dataset& d, double A) {
  if (d.prior_known()) return gaussian_log_marginal(d, A, {});
  GlsResult gls = gaussian_gls(d, A);
  double ll = gaussian_log_marginal(d, A, gls.beta_hat);
  Mat l = cholesky(gls.sigma_hat);
  return ll + 0.5 * d.m() * std::log(2.0 * pi) + 0.5 * chol_log_det(l);
}

// ---------------------------------------------------------------------------
// Poisson (negative binomial marginal; prior mean must be known)

inline double poisson_log_marginal(const Dataset& d, double r) {
  if (!(r > 0.0)) throw std::domain_error("poisson_log_marginal: r must be positive");
  double ll = 0.0;
  for (std::size_t j = 0; j < d.k(); ++j) {
    const double nj = d.n(j), yj = d.y[j];
    const double rl = r * d.prior_mean[j];
    // log(1-B) = -log1p(r/n), log B = -log1p(n/r); written to stay finite at
    // both ends of the alpha range
    const double log_one_minus_b = -std::log1p(r / nj);
    const double log_b = r > 1.0 ? -std::log1p(nj / r) : std::log(r) - std::log(r + nj);
    ll += log_gamma_ratio(rl, yj) - log_gamma(yj + 1.0) +
          (yj > 0.0 ? yj * log_one_minus_b : 0.0) + rl * log_b;
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Binomial (beta-binomial marginal)

// beta-binomial term via Gamma ratios with integer counts:
//   ln B(y + a0, n - y + b0) - ln B(a0, b0)
//     = [lnG(a0+y) - lnG(a0)] + [lnG(b0+n-y) - lnG(b0)] - [lnG(r+n) - lnG(r)]
inline double binomial_log_marginal(const Dataset& d, double r, const Vec& beta) {
  if (!(r > 0.0)) throw std::domain_error("binomial_log_marginal: r must be positive");
  double ll = 0.0;
  for (std::size_t j = 0; j < d.k(); ++j) {
    const double nj = d.n(j), yj = d.y[j];
    const double pe = d.prior_known() ? d.prior_mean[j] : logistic(dot_row(d, j, beta));
    ll += log_choose(nj, yj) + log_gamma_ratio(r * pe, yj) +
          log_gamma_ratio(r * (1.0 - pe), nj - yj) - log_gamma_ratio(r, nj);
  }
  return ll;
}

namespace detail {

// Analytic gradient and Hessian of the beta-binomial log likelihood in beta.
// With p = logistic(x'beta), a0 = rp, b0 = r(1-p) and integer counts, the
// digamma/trigamma differences collapse to finite sums:
//   dl/dp   = r [ (psi(a0+y) - psi(a0)) - (psi(b0+n-y) - psi(b0)) ]
//   d2l/dp2 = r^2 [ (psi'(a0+y) - psi'(a0)) + (psi'(b0+n-y) - psi'(b0)) ]
// and the chain rule goes through dp/dbeta = p(1-p) x.
inline double binomial_beta_grad_hess(const Dataset& d, double r, const Vec& beta,
                                      Vec& grad, Mat& hess) {
  const std::size_t k = d.k(), m = d.m();
  grad.assign(m, 0.0);
  hess = Mat(m, m);
  double ll = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double nj = d.n(j), yj = d.y[j];
    const double p = logistic(dot_row(d, j, beta));
    const double a0 = r * p, b0 = r * (1.0 - p);
    ll += log_choose(nj, yj) + log_gamma_ratio(a0, yj) +
          log_gamma_ratio(b0, nj - yj) - log_gamma_ratio(r, nj);
    const double dp = r * (digamma_ratio(a0, yj) - digamma_ratio(b0, nj - yj));
    const double d2p = r * r * (trigamma_ratio(a0, yj) + trigamma_ratio(b0, nj - yj));
    const double w = p * (1.0 - p);
    const double gscale = dp * w;
    const double hscale = d2p * w * w + dp * w * (1.0 - 2.0 * p);
    for (std::size_t pcol = 0; pcol < m; ++pcol) {
      grad[pcol] += gscale * d.X(j, pcol);
      for (std::size_t q = pcol; q < m; ++q)
        hess(pcol, q) += hscale * d.X(j, pcol) * d.X(j, q);
    }
  }
  for (std::size_t pcol = 0; pcol < m; ++pcol)
    for (std::size_t q = 0; q < pcol; ++q) hess(pcol, q) = hess(q, pcol);
  return ll;
}

}  // namespace detail

struct BinomialProfile {
  Vec beta_hat;
  Mat sigma_hat;              // inverse negative Hessian at the mode
  double log_likelihood = 0;  // log L(alpha, beta_hat)
  double laplace_log_marginal = 0;  // log ∫ L(alpha, beta) dbeta (Laplace)
};

// Inner Newton maximization of log L(alpha, beta) over beta, plus the Laplace
// value  log L + (m/2) log 2pi + 1/2 log |Sigma^|.
inline BinomialProfile binomial_profile_beta(const Dataset& d, double alpha,
                                             Vec start = {}) {
  const double r = std::exp(-alpha);
  const std::size_t m = d.m();
  if (start.size() != m) start.assign(m, 0.0);
  auto fgh = [&](const Vec& b, Vec& g, Mat& h) {
    return detail::binomial_beta_grad_hess(d, r, b, g, h);
  };
  // the log-det part of the Laplace value is first-order in the beta error,
  // so the mode must be located tightly for smooth curvature in alpha
  NewtonOptions opts;
  opts.grad_tol = 1e-9;
  NewtonResult nr = newton_max(fgh, std::move(start), opts);
  if (!nr.converged)
    throw fit_error("binomial_profile_beta: Newton did not converge (last beta[0] = " +
                    std::to_string(nr.x.empty() ? 0.0 : nr.x[0]) + ")");
  BinomialProfile prof;
  prof.beta_hat = nr.x;
  Mat l = cholesky(nr.neg_hessian);
  prof.sigma_hat = inverse_spd(nr.neg_hessian);
  prof.log_likelihood = nr.fx;
  prof.laplace_log_marginal =
      nr.fx + 0.5 * m * std::log(2.0 * pi) - 0.5 * chol_log_det(l);
  return prof;
}

// ---------------------------------------------------------------------------
// Hyper-parameter log posteriors on the alpha scale

// log prior factor for r-models after the change of variables to alpha:
// f(alpha | y) ∝ L(alpha) r/(t+r)^{u+1}; the default (0,1) gives exp(alpha) L.
inline double log_r_prior_factor(double alpha, const HyperPriorFamily& fam) {
  const double r = std::exp(-alpha);
  if (fam.t == 0.0) {
    // log[r / r^{u+1}] = -u log r = u * alpha
    return fam.u * alpha;
  }
  return -alpha - (fam.u + 1.0) * std::log(fam.t + r);
}

// Marginal log posterior of alpha with beta integrated out (exactly for the
// Gaussian, by Laplace for the Binomial with covariates). This is the ADM
// maximand; its mode is post.mode.alpha.
inline double log_hyper_posterior_alpha(const Dataset& d, double alpha,
                                        const HyperPriorFamily& fam = {},
                                        Vec* beta_warm_start = nullptr) {
  switch (d.kind) {
    case ModelKind::gaussian:
      // flat prior on A; + alpha is the Jacobian of A = e^alpha
      return gaussian_integrated_log_marginal(d, std::exp(alpha)) + alpha;
    case ModelKind::poisson:
      return poisson_log_marginal(d, std::exp(-alpha)) + log_r_prior_factor(alpha, fam);
    default: {
      if (d.prior_known())
        return binomial_log_marginal(d, std::exp(-alpha), {}) +
               log_r_prior_factor(alpha, fam);
      Vec start = beta_warm_start ? *beta_warm_start : Vec{};
      BinomialProfile prof = binomial_profile_beta(d, alpha, std::move(start));
      if (beta_warm_start) *beta_warm_start = prof.beta_hat;
      return prof.laplace_log_marginal + log_r_prior_factor(alpha, fam);
    }
  }
}

// Joint log posterior of (alpha, beta) up to a constant; the A-R target.
inline double log_hyper_posterior(const Dataset& d, const HyperParams& h,
                                  const HyperPriorFamily& fam = {}) {
  switch (d.kind) {
    case ModelKind::gaussian:
      return gaussian_log_marginal(d, std::exp(h.alpha), h.beta) + h.alpha;
    case ModelKind::poisson:
      return poisson_log_marginal(d, std::exp(-h.alpha)) + log_r_prior_factor(h.alpha, fam);
    default:
      return binomial_log_marginal(d, std::exp(-h.alpha), h.beta) +
             log_r_prior_factor(h.alpha, fam);
  }
}

}  // namespace gbp
