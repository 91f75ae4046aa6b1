#pragma once

// Two-level conjugate hierarchical models on group-level aggregate data:
//   Gaussian:  y_j | mu_j     ~ N(mu_j, V_j),        mu_j ~ N(muE_j, A)
//   Poisson:   y_j | lambda_j ~ Poisson(n_j lambda_j), lambda_j ~ Gamma(r lamE_j, r)
//   Binomial:  y_j | p_j      ~ Bin(n_j, p_j),       p_j ~ Beta(r pE_j, r(1-pE_j))
// plus dataset validation (posterior propriety rules) and the closed-form
// conditional posteriors of the random effects.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gbp/errors.hpp"
#include "gbp/math/distributions.hpp"
#include "gbp/math/linalg.hpp"

namespace gbp {

enum class ModelKind { gaussian, poisson, binomial };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::gaussian: return "gaussian";
    case ModelKind::poisson: return "poisson";
    default: return "binomial";
  }
}

struct Dataset {
  ModelKind kind = ModelKind::gaussian;
  std::vector<double> y;        // sample means (gaussian) or counts
  std::vector<double> se_or_n;  // standard errors (gaussian) or trials/exposures
  Mat X;                        // k x m design matrix (empty when prior mean known)
  std::vector<double> prior_mean;  // known expected random effects (empty otherwise)

  std::size_t k() const { return y.size(); }
  std::size_t m() const { return X.cols(); }
  bool prior_known() const { return !prior_mean.empty(); }

  double n(std::size_t j) const { return se_or_n[j]; }
  double V(std::size_t j) const { return se_or_n[j] * se_or_n[j]; }
  // per-group observed mean: y_j (gaussian) or y_j/n_j
  double obs_mean(std::size_t j) const {
    return kind == ModelKind::gaussian ? y[j] : y[j] / se_or_n[j];
  }
};

// x_j' beta for row j of the design matrix
inline double dot_row(const Dataset& d, std::size_t j, const Vec& beta) {
  double s = 0.0;
  for (std::size_t c = 0; c < d.m(); ++c) s += d.X(j, c) * beta[c];
  return s;
}

// Assemble a dataset; prepends an intercept column to `covariates` unless
// `intercept` is off. Exactly one of {design matrix, known prior mean}
// governs the expected random effects.
inline Dataset make_dataset(ModelKind kind, std::vector<double> y,
                            std::vector<double> se_or_n,
                            const Mat& covariates = {},
                            std::vector<double> prior_mean = {},
                            bool intercept = true) {
  Dataset d;
  d.kind = kind;
  d.y = std::move(y);
  d.se_or_n = std::move(se_or_n);
  const std::size_t k = d.y.size();
  if (!prior_mean.empty()) {
    if (prior_mean.size() == 1) prior_mean.assign(k, prior_mean[0]);
    d.prior_mean = std::move(prior_mean);
  } else {
    const std::size_t mc = covariates.cols();
    const std::size_t m = mc + (intercept ? 1 : 0);
    d.X = Mat(k, m);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t col = 0;
      if (intercept) d.X(i, col++) = 1.0;
      for (std::size_t j = 0; j < mc; ++j) d.X(i, col++) = covariates(i, j);
    }
  }
  return d;
}

struct ValidationIssue {
  std::string rule;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  void fail(std::string rule, std::string detail) {
    ok = false;
    issues.push_back({std::move(rule), std::move(detail)});
  }
};

// Structural and posterior-propriety validation:
//  gaussian: k >= m + 3                                       (flat prior on A)
//  poisson:  known prior mean required; >= 2 groups with y > 0
//  binomial: >= 2 interior groups (0 < y_j < n_j); with a design matrix the
//            interior-group rows must have full column rank m
inline ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport rep;
  const std::size_t k = d.k();
  if (k < 1) {
    rep.fail("k >= 1", "dataset is empty");
    return rep;
  }
  if (d.se_or_n.size() != k) {
    rep.fail("column lengths", "y and se/n have different lengths");
    return rep;
  }
  if (d.prior_known() && d.prior_mean.size() != k)
    rep.fail("column lengths", "prior_mean length differs from k");
  if (d.prior_known() == !d.X.empty())
    rep.fail("prior mean specification",
             "exactly one of {design matrix, known prior mean} must be present");
  for (std::size_t j = 0; j < k; ++j) {
    if (!(d.se_or_n[j] > 0.0)) {
      rep.fail(d.kind == ModelKind::gaussian ? "positive standard errors"
                                             : "positive trials/exposures",
               "group " + std::to_string(j + 1));
    }
    if (d.kind != ModelKind::gaussian) {
      if (d.y[j] < 0.0 || d.y[j] != std::floor(d.y[j]))
        rep.fail("non-negative integer counts", "group " + std::to_string(j + 1));
      if (d.kind == ModelKind::binomial) {
        if (d.se_or_n[j] != std::floor(d.se_or_n[j]))
          rep.fail("integer trials", "group " + std::to_string(j + 1));
        if (d.y[j] > d.se_or_n[j])
          rep.fail("y <= n", "group " + std::to_string(j + 1));
      }
    }
    if (d.prior_known() && d.prior_mean.size() == k) {
      if (d.kind == ModelKind::binomial &&
          !(d.prior_mean[j] > 0.0 && d.prior_mean[j] < 1.0))
        rep.fail("prior mean in (0,1)", "group " + std::to_string(j + 1));
      if (d.kind == ModelKind::poisson && !(d.prior_mean[j] > 0.0))
        rep.fail("positive prior mean", "group " + std::to_string(j + 1));
    }
  }
  if (!rep.ok) return rep;

  switch (d.kind) {
    case ModelKind::gaussian: {
      if (!d.prior_known() && k < d.m() + 3)
        rep.fail("k >= m+3",
                 "Gaussian posterior propriety needs k >= m+3; k = " +
                     std::to_string(k) + ", m = " + std::to_string(d.m()));
      break;
    }
    case ModelKind::poisson: {
      if (!d.prior_known())
        rep.fail("known prior mean required",
                 "the Poisson model needs known expected random effects");
      std::size_t nonzero = 0;
      for (double yj : d.y)
        if (yj > 0.0) ++nonzero;
      if (nonzero < 2)
        rep.fail("at least two non-zero groups",
                 "Poisson propriety needs >= 2 groups with y > 0; found " +
                     std::to_string(nonzero));
      break;
    }
    case ModelKind::binomial: {
      std::vector<std::size_t> interior;
      for (std::size_t j = 0; j < k; ++j)
        if (d.y[j] > 0.0 && d.y[j] < d.se_or_n[j]) interior.push_back(j);
      if (interior.size() < 2)
        rep.fail("at least two interior groups",
                 "Binomial propriety needs >= 2 groups with 0 < y < n; found " +
                     std::to_string(interior.size()));
      if (!d.prior_known() && interior.size() >= 2) {
        Mat sub(interior.size(), d.m());
        for (std::size_t r = 0; r < interior.size(); ++r)
          for (std::size_t c = 0; c < d.m(); ++c) sub(r, c) = d.X(interior[r], c);
        if (qr_rank(sub, 1e-10) < d.m())
          rep.fail("interior design matrix full rank",
                   "covariates restricted to interior groups are rank deficient");
      }
      break;
    }
  }
  return rep;
}

inline void throw_if_invalid(const Dataset& d) {
  ValidationReport rep = validate_dataset(d);
  if (!rep.ok) throw validation_error(rep.issues.front().rule, rep.issues.front().detail);
}

// alpha = log(A) for the Gaussian model, alpha = -log(r) otherwise;
// beta holds regression coefficients (empty when the prior mean is known).
struct HyperParams {
  double alpha = 0.0;
  Vec beta;
};

// Shrinkage factor: V_j/(V_j + A) for Gaussian, r/(r + n_j) otherwise
// (written e^{-alpha}/(n_j + e^{-alpha}) to stay finite for any alpha).
inline double shrinkage(double alpha, double n_or_V, ModelKind kind) {
  if (kind == ModelKind::gaussian) {
    // V/(V + e^alpha) = 1/(1 + e^alpha / V)
    return 1.0 / (1.0 + std::exp(alpha) / n_or_V);
  }
  const double r = std::exp(-alpha);
  return r / (r + n_or_V);
}

struct ConditionalPosterior {
  enum class Family { normal, gamma, beta } family;
  Vec par1;  // mean (normal), shape (gamma), alpha (beta)
  Vec par2;  // variance (normal), rate (gamma), beta (beta)

  double mean(std::size_t j) const {
    switch (family) {
      case Family::normal: return par1[j];
      case Family::gamma: return par1[j] / par2[j];
      default: return par1[j] / (par1[j] + par2[j]);
    }
  }
  double variance(std::size_t j) const {
    switch (family) {
      case Family::normal: return par2[j];
      case Family::gamma: return par1[j] / (par2[j] * par2[j]);
      default: {
        double s = par1[j] + par2[j];
        return par1[j] * par2[j] / (s * s * (s + 1.0));
      }
    }
  }
  double cdf(std::size_t j, double x) const {
    switch (family) {
      case Family::normal:
        return par2[j] > 0.0 ? normal_cdf(x, par1[j], std::sqrt(par2[j]))
                             : (x >= par1[j] ? 1.0 : 0.0);
      case Family::gamma: return gamma_cdf(x, par1[j], par2[j]);
      default: return beta_cdf(x, par1[j], par2[j]);
    }
  }
};

// Closed-form conditional posteriors of the random effects given the
// hyper-parameters and per-group prior means:
//   Normal((1-B)y + B muE, (1-B)V) / Gamma(r lamE + y, r + n) /
//   Beta(y + r pE, n - y + r(1-pE))
inline ConditionalPosterior conditional_posterior(const Dataset& d, const HyperParams& h,
                                                  const Vec& prior_means) {
  ConditionalPosterior post;
  const std::size_t k = d.k();
  post.par1.resize(k);
  post.par2.resize(k);
  if (d.kind == ModelKind::gaussian) {
    post.family = ConditionalPosterior::Family::normal;
    for (std::size_t j = 0; j < k; ++j) {
      double b = shrinkage(h.alpha, d.V(j), d.kind);
      post.par1[j] = (1.0 - b) * d.y[j] + b * prior_means[j];
      post.par2[j] = (1.0 - b) * d.V(j);
    }
  } else if (d.kind == ModelKind::poisson) {
    post.family = ConditionalPosterior::Family::gamma;
    const double r = std::exp(-h.alpha);
    for (std::size_t j = 0; j < k; ++j) {
      post.par1[j] = r * prior_means[j] + d.y[j];
      post.par2[j] = r + d.n(j);
    }
  } else {
    post.family = ConditionalPosterior::Family::beta;
    const double r = std::exp(-h.alpha);
    for (std::size_t j = 0; j < k; ++j) {
      post.par1[j] = d.y[j] + r * prior_means[j];
      post.par2[j] = d.n(j) - d.y[j] + r * (1.0 - prior_means[j]);
    }
  }
  return post;
}

}  // namespace gbp
