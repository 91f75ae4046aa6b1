#pragma once

// Adjustment-for-density-maximization fitting pipeline:
//   1. maximize the marginal log posterior of alpha; the negative second
//      derivative at the mode is the invariant information I_inv
//   2. per group, approximate the shrinkage posterior B_j | y by
//      Beta(a1j, a0j) with a1j = I_inv/(1-B'_j), a0j = I_inv/B'_j, so that
//      the Beta mean is B'_j and its variance matches
//        B'^2 (1-B')^2 / (I_inv + B'(1-B'))
//   3. estimate the posterior moments of the expected random effects
//      (GLS for Gaussian, a log-Normal-matched Gamma ratio for Binomial)
//   4. match the unconditional posterior of each random effect to a
//      skewed-Normal (Gaussian), Gamma (Poisson) or Beta (Binomial) family
//      and report means and central quantile intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gbp/errors.hpp"
#include "gbp/likelihood.hpp"
#include "gbp/math/optimize.hpp"
#include "gbp/math/skew_normal.hpp"
#include "gbp/model.hpp"

namespace gbp {

struct AlphaFit {
  double alpha_hat = 0.0;
  double info_inv = 0.0;  // invariant information, -(d^2/dalpha^2) at the mode
  double alpha_sd = 0.0;  // info_inv^{-1/2}
};

struct FitOptions {
  double confidence = 0.95;
  bool normal_ci = false;  // Gaussian: Normal instead of skewed-Normal intervals
  HyperPriorFamily prior;
  std::optional<double> bracket_center;  // warm start for repeated refits
};

namespace detail {
// default starting point for the alpha bracket
inline double alpha_start(const Dataset& d) {
  if (d.kind != ModelKind::gaussian) return 0.0;
  double mean_y = std::accumulate(d.y.begin(), d.y.end(), 0.0) / d.k();
  double var_y = 0.0, mean_v = 0.0;
  for (std::size_t j = 0; j < d.k(); ++j) {
    var_y += (d.y[j] - mean_y) * (d.y[j] - mean_y);
    mean_v += d.V(j);
  }
  var_y /= std::max<std::size_t>(d.k() - 1, 1);
  mean_v /= d.k();
  return std::log(std::max(var_y - mean_v, 0.0) + 1e-3 * mean_v + 1e-8);
}
}  // namespace detail

// Mode and curvature of f(alpha | y). The bracket is expanded from the
// starting point until the maximand decreases on both ends; curvature by a
// Richardson-extrapolated central second difference.
inline AlphaFit fit_alpha(const Dataset& d, const HyperPriorFamily& fam = {},
                          std::optional<double> bracket_center = {}) {
  Vec beta_warm;
  auto maximand = [&](double alpha) {
    return log_hyper_posterior_alpha(d, alpha, fam, &beta_warm);
  };
  const double start = bracket_center ? *bracket_center : detail::alpha_start(d);
  Bracket br = expand_bracket(maximand, start);
  MaxResult mx = brent_max(maximand, br, 1e-8);
  AlphaFit fit;
  fit.alpha_hat = mx.x;
  const double h = 1e-4 * std::max(1.0, std::fabs(mx.x));
  fit.info_inv = -second_derivative(maximand, mx.x, h);
  if (!(fit.info_inv > 0.0))
    throw fit_error("fit_alpha: non-positive curvature at the mode");
  fit.alpha_sd = 1.0 / std::sqrt(fit.info_inv);
  return fit;
}

// Per-group Beta(a1j, a0j) approximation to the shrinkage posterior.
struct ShrinkageApprox {
  Vec a1, a0, b_point;

  // E(B^c | y) = B(a1 + c, a0) / B(a1, a0)
  double moment(std::size_t j, double c) const {
    return std::exp(log_beta(a1[j] + c, a0[j]) - log_beta(a1[j], a0[j]));
  }
  double e_b(std::size_t j) const { return a1[j] / (a1[j] + a0[j]); }
  double e_b2(std::size_t j) const {
    double s = a1[j] + a0[j];
    return a1[j] * (a1[j] + 1.0) / (s * (s + 1.0));
  }
  double e_b3(std::size_t j) const {
    double s = a1[j] + a0[j];
    return e_b2(j) * (a1[j] + 2.0) / (s + 2.0);
  }
  double var_b(std::size_t j) const { return e_b2(j) - e_b(j) * e_b(j); }
};

inline ShrinkageApprox shrinkage_approx(const AlphaFit& fit, const Dataset& d) {
  ShrinkageApprox s;
  const std::size_t k = d.k();
  s.a1.resize(k);
  s.a0.resize(k);
  s.b_point.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double nv = d.kind == ModelKind::gaussian ? d.V(j) : d.n(j);
    double b = shrinkage(fit.alpha_hat, nv, d.kind);
    s.b_point[j] = b;
    s.a1[j] = fit.info_inv / (1.0 - b);
    s.a0[j] = fit.info_inv / b;
  }
  return s;
}

// Var(B_j | y) = B'^2 (1-B')^2 / (I_inv + B'(1-B'))
inline double variance_of_shrinkage(const AlphaFit& fit, double b_point) {
  double bq = b_point * (1.0 - b_point);
  return bq * bq / (fit.info_inv + bq);
}

// Posterior moments of the expected random effects.
//   Gaussian: mean[j] = x_j' beta^, var[j] = x_j' Sigma^ x_j (exact GLS)
//   Binomial: Beta(b1j, b0j) matched through the log-Normal moments of
//             exp(x_j' beta); mean/m2 are its first two moments
// Known prior means are carried through as degenerate (zero variance).
struct ExpectedEffectMoments {
  Vec mean;  // E(pE_j | y) or E(muE_j | y)
  Vec m2;    // second moment (binomial) -- E((pE_j)^2 | y)
  Vec var;   // variance (gaussian: x' Sigma x; binomial: m2 - mean^2)
  Vec b1, b0;  // binomial Beta parameters (empty for gaussian / degenerate)
  std::vector<bool> degenerate;
};

inline ExpectedEffectMoments expected_effect_moments_gaussian(const Dataset& d,
                                                              double alpha_hat) {
  ExpectedEffectMoments e;
  const std::size_t k = d.k();
  e.mean.resize(k);
  e.var.assign(k, 0.0);
  e.m2.resize(k);
  e.degenerate.assign(k, false);
  if (d.prior_known()) {
    for (std::size_t j = 0; j < k; ++j) {
      e.mean[j] = d.prior_mean[j];
      e.degenerate[j] = true;
    }
  } else {
    GlsResult gls = gaussian_gls(d, std::exp(alpha_hat));
    for (std::size_t j = 0; j < k; ++j) {
      Vec xj(d.m());
      for (std::size_t c = 0; c < d.m(); ++c) xj[c] = d.X(j, c);
      e.mean[j] = dot(xj, gls.beta_hat);
      e.var[j] = quad_form(gls.sigma_hat, xj);
    }
  }
  for (std::size_t j = 0; j < k; ++j) e.m2[j] = e.var[j] + e.mean[j] * e.mean[j];
  return e;
}

inline ExpectedEffectMoments expected_effect_moments_binomial(
    const Dataset& d, const BinomialProfile& prof) {
  ExpectedEffectMoments e;
  const std::size_t k = d.k();
  e.mean.resize(k);
  e.m2.resize(k);
  e.var.resize(k);
  e.b1.assign(k, 0.0);
  e.b0.assign(k, 0.0);
  e.degenerate.assign(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    if (d.prior_known()) {
      e.mean[j] = d.prior_mean[j];
      e.m2[j] = e.mean[j] * e.mean[j];
      e.var[j] = 0.0;
      e.degenerate[j] = true;
      continue;
    }
    Vec xj(d.m());
    for (std::size_t c = 0; c < d.m(); ++c) xj[c] = d.X(j, c);
    const double xb = dot(xj, prof.beta_hat);
    const double xsx = quad_form(prof.sigma_hat, xj);
    if (xsx == 0.0) {
      e.mean[j] = logistic(xb);
      e.m2[j] = e.mean[j] * e.mean[j];
      e.var[j] = 0.0;
      e.degenerate[j] = true;
      continue;
    }
    // log-Normal moments of eta = exp(x'beta), matched to a Gamma ratio
    const double eta = std::exp(xb + 0.5 * xsx);
    const double b0 = (1.0 + eta) / (eta * std::expm1(xsx)) + 2.0;
    const double b1 = eta * (b0 - 1.0);
    e.b1[j] = b1;
    e.b0[j] = b0;
    e.mean[j] = b1 / (b1 + b0);
    e.m2[j] = b1 * (b1 + 1.0) / ((b1 + b0) * (b1 + b0 + 1.0));
    e.var[j] = e.m2[j] - e.mean[j] * e.mean[j];
  }
  return e;
}

// Matched unconditional posterior of the random effects.
struct RandomEffectPosterior {
  enum class Family { skew_normal, gamma, beta } family;
  std::vector<SkewNormalParams> sn;  // gaussian only (empty if normal_ci)
  std::vector<bool> use_normal;      // gaussian: Normal(c1, c2) per group
  Vec par1, par2;  // gamma: shape/rate; beta: alpha/beta; normal: mean/var
  Vec point, lower, upper, sd;
  std::vector<std::string> warnings;

  double cdf(std::size_t j, double x) const {
    switch (family) {
      case Family::gamma: return gamma_cdf(x, par1[j], par2[j]);
      case Family::beta: return beta_cdf(x, par1[j], par2[j]);
      default:
        if (use_normal[j]) return normal_cdf(x, par1[j], std::sqrt(par2[j]));
        return skew_normal_cdf(x, sn[j]);
    }
  }
};

inline RandomEffectPosterior match_random_effect_poisson(const Dataset& d,
                                                         const ShrinkageApprox& shr,
                                                         double confidence) {
  RandomEffectPosterior post;
  post.family = RandomEffectPosterior::Family::gamma;
  const std::size_t k = d.k();
  post.par1.resize(k);
  post.par2.resize(k);
  post.point.resize(k);
  post.lower.resize(k);
  post.upper.resize(k);
  post.sd.resize(k);
  const double ptail = 0.5 * (1.0 - confidence);
  for (std::size_t j = 0; j < k; ++j) {
    const double yb = d.obs_mean(j), le = d.prior_mean[j];
    const double eb = shr.e_b(j), eb2 = shr.e_b2(j);
    const double mu = (1.0 - eb) * yb + eb * le;
    const double e_1mb_sq = 1.0 - 2.0 * eb + eb2;   // E[(1-B)^2]
    const double e_b_1mb = eb - eb2;                // E[B(1-B)]
    const double vb = eb2 - eb * eb;
    const double var = (yb * e_1mb_sq + le * e_b_1mb) / d.n(j) +
                       (yb - le) * (yb - le) * vb;
    if (!(var > 0.0)) throw fit_error("poisson matching produced non-positive variance");
    post.par1[j] = mu * mu / var;  // shape
    post.par2[j] = mu / var;       // rate
    post.point[j] = mu;
    post.sd[j] = std::sqrt(var);
    post.lower[j] = gamma_quantile(ptail, post.par1[j], post.par2[j]);
    post.upper[j] = gamma_quantile(1.0 - ptail, post.par1[j], post.par2[j]);
  }
  return post;
}

inline RandomEffectPosterior match_random_effect_binomial(
    const Dataset& d, const ShrinkageApprox& shr, const ExpectedEffectMoments& eff,
    double confidence) {
  RandomEffectPosterior post;
  post.family = RandomEffectPosterior::Family::beta;
  const std::size_t k = d.k();
  post.par1.resize(k);
  post.par2.resize(k);
  post.point.resize(k);
  post.lower.resize(k);
  post.upper.resize(k);
  post.sd.resize(k);
  const double ptail = 0.5 * (1.0 - confidence);
  for (std::size_t j = 0; j < k; ++j) {
    const double yb = d.obs_mean(j);
    const double eb = shr.e_b(j), eb2 = shr.e_b2(j), eb3 = shr.e_b3(j);
    const double epe = eff.mean[j], epe2 = eff.m2[j];
    const double mu = (1.0 - eb) * yb + eb * epe;
    // E[(ybar - pE)^2 | y] from the Beta(b1, b0) second moment
    const double w2 = yb * yb - 2.0 * yb * epe + epe2;
    // Var(B(ybar - pE) | y) under posterior independence of B and pE
    const double var_bw = eb2 * w2 - eb * eb * (yb - epe) * (yb - epe);
    // first-order Taylor of E[p*(1-p*)/(r+n+1)]; expanding
    // p*(1-p*)(1-B) in moments of B and pE gives the three-term bracket
    double var = (yb * (1.0 - yb) * (1.0 - eb) +
                  (2.0 * yb - 1.0) * (eb - eb2) * (yb - epe) -
                  (eb2 - eb3) * w2) / d.n(j) +
                 var_bw;
    const double cap = mu * (1.0 - mu);
    if (!(var < cap)) {
      var = 0.999 * cap;
      post.warnings.push_back("group " + std::to_string(j + 1) +
                              ": variance clamped below mu(1-mu)");
    }
    const double scale = cap / var - 1.0;
    post.par1[j] = scale * mu;
    post.par2[j] = scale * (1.0 - mu);
    post.point[j] = mu;
    post.sd[j] = std::sqrt(var);
    post.lower[j] = beta_quantile(ptail, post.par1[j], post.par2[j]);
    post.upper[j] = beta_quantile(1.0 - ptail, post.par1[j], post.par2[j]);
  }
  return post;
}

// Gaussian: first three cumulants of mu_j | y by mixing the conditional
// Normal over B ~ Beta(a1j, a0j), with the expected-effect mean/variance
// (m_j, s_j) frozen at alpha^. The uncertainty of m_j enters the variance
// with the point shrinkage (E B)^2 and, being symmetric and independent,
// does not contribute to the third cumulant:
//   c1 = y + EB d,                                  d = m_j - y_j
//   c2 = E(1-B) V + (EB)^2 s + d^2 Var(B)
//   c3 = d^3 [E(B^3) - 3E(B^2)EB + 2(EB)^3] - 3 d V Var(B)
inline RandomEffectPosterior match_random_effect_gaussian(
    const Dataset& d, const ShrinkageApprox& shr, const ExpectedEffectMoments& eff,
    bool normal_ci, double confidence) {
  RandomEffectPosterior post;
  post.family = RandomEffectPosterior::Family::skew_normal;
  const std::size_t k = d.k();
  post.sn.resize(k);
  post.use_normal.assign(k, normal_ci);
  post.par1.resize(k);
  post.par2.resize(k);
  post.point.resize(k);
  post.lower.resize(k);
  post.upper.resize(k);
  post.sd.resize(k);
  const double ptail = 0.5 * (1.0 - confidence);
  for (std::size_t j = 0; j < k; ++j) {
    const double eb = shr.e_b(j), eb2 = shr.e_b2(j), eb3 = shr.e_b3(j);
    const double vb = eb2 - eb * eb;
    const double vj = d.V(j);
    const double gap = eff.mean[j] - d.y[j];
    const double c1 = d.y[j] + eb * gap;
    const double c2 = (1.0 - eb) * vj + eb * eb * eff.var[j] + gap * gap * vb;
    const double gamma3 = eb3 - 3.0 * eb2 * eb + 2.0 * eb * eb * eb;
    const double c3 = gap * gap * gap * gamma3 - 3.0 * gap * vj * vb;
    post.par1[j] = c1;
    post.par2[j] = c2;
    post.point[j] = c1;
    post.sd[j] = std::sqrt(c2);
    if (normal_ci) {
      post.lower[j] = normal_quantile(ptail, c1, post.sd[j]);
      post.upper[j] = normal_quantile(1.0 - ptail, c1, post.sd[j]);
      post.sn[j] = {c1, post.sd[j], 0.0};
      continue;
    }
    SkewNormalMatch match = skew_normal_from_cumulants(c1, c2, c3);
    if (match.clamped)
      post.warnings.push_back("group " + std::to_string(j + 1) +
                              ": skewness clamped to the skew-normal bound");
    post.sn[j] = match.params;
    post.lower[j] = skew_normal_quantile(ptail, match.params);
    post.upper[j] = skew_normal_quantile(1.0 - ptail, match.params);
  }
  return post;
}

// ---------------------------------------------------------------------------
// Orchestrated fit

struct GroupRow {
  double obs_mean = 0.0;
  double n_or_se = 0.0;
  Vec covariates;  // displayed covariate values (excluding intercept)
  double prior_mean = 0.0;
  double shrinkage = 0.0;
  double low = 0.0;
  double post_mean = 0.0;
  double upp = 0.0;
  double post_sd = 0.0;
};

struct RegressionSummary {
  Vec estimate, se, z, p;
  bool present() const { return !estimate.empty(); }
};

struct HyperSummary {
  double post_mode_alpha = 0.0;
  double post_sd_alpha = 0.0;
  double post_mode_a_or_r = 0.0;  // A^ = e^alpha (gaussian), r^ = e^{-alpha}
};

struct FitResult {
  Dataset data;
  FitOptions options;
  AlphaFit alpha_fit;
  ShrinkageApprox shrink;
  ExpectedEffectMoments effects;
  RandomEffectPosterior posterior;
  std::optional<GlsResult> gls;
  std::optional<BinomialProfile> profile;
  RegressionSummary regression;
  HyperSummary hyper;
  std::vector<GroupRow> rows;  // in input order
  GroupRow mean_row;
  std::vector<std::size_t> display_order;
  std::vector<std::string> warnings;
};

namespace detail {
inline std::vector<std::size_t> sorted_order(const Dataset& d) {
  std::vector<std::size_t> idx(d.k());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (d.kind == ModelKind::gaussian) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d.se_or_n[a] > d.se_or_n[b];  // descending se
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d.se_or_n[a] < d.se_or_n[b];  // ascending n
    });
  }
  return idx;
}
}  // namespace detail

// Full ADM fit: validation is the caller's job (see throw_if_invalid).
inline FitResult fit(const Dataset& d, const FitOptions& options = {}) {
  options.prior.validate();
  if (!(options.confidence > 0.0) || !(options.confidence < 1.0))
    throw config_error("confidence level must be in (0,1)");
  FitResult res;
  res.data = d;
  res.options = options;
  res.alpha_fit = fit_alpha(d, options.prior, options.bracket_center);
  res.shrink = shrinkage_approx(res.alpha_fit, d);

  switch (d.kind) {
    case ModelKind::gaussian:
      res.effects = expected_effect_moments_gaussian(d, res.alpha_fit.alpha_hat);
      if (!d.prior_known()) res.gls = gaussian_gls(d, std::exp(res.alpha_fit.alpha_hat));
      res.posterior = match_random_effect_gaussian(d, res.shrink, res.effects,
                                                   options.normal_ci, options.confidence);
      break;
    case ModelKind::poisson:
      res.effects = expected_effect_moments_gaussian(d, res.alpha_fit.alpha_hat);
      res.posterior = match_random_effect_poisson(d, res.shrink, options.confidence);
      break;
    case ModelKind::binomial: {
      if (!d.prior_known()) {
        res.profile = binomial_profile_beta(d, res.alpha_fit.alpha_hat);
        res.effects = expected_effect_moments_binomial(d, *res.profile);
      } else {
        BinomialProfile dummy;
        res.effects = expected_effect_moments_binomial(d, dummy);
      }
      res.posterior =
          match_random_effect_binomial(d, res.shrink, res.effects, options.confidence);
      break;
    }
  }
  for (const std::string& w : res.posterior.warnings) res.warnings.push_back(w);

  // regression summary (normal-theory z and two-sided p)
  if (!d.prior_known()) {
    const Mat* sigma = nullptr;
    const Vec* beta = nullptr;
    if (res.gls) {
      sigma = &res.gls->sigma_hat;
      beta = &res.gls->beta_hat;
    } else if (res.profile) {
      sigma = &res.profile->sigma_hat;
      beta = &res.profile->beta_hat;
    }
    if (beta) {
      for (std::size_t c = 0; c < beta->size(); ++c) {
        double est = (*beta)[c];
        double se = std::sqrt((*sigma)(c, c));
        double z = est / se;
        res.regression.estimate.push_back(est);
        res.regression.se.push_back(se);
        res.regression.z.push_back(z);
        res.regression.p.push_back(2.0 * normal_cdf(-std::fabs(z)));
      }
    }
  }

  res.hyper.post_mode_alpha = res.alpha_fit.alpha_hat;
  res.hyper.post_sd_alpha = res.alpha_fit.alpha_sd;
  res.hyper.post_mode_a_or_r = d.kind == ModelKind::gaussian
                                   ? std::exp(res.alpha_fit.alpha_hat)
                                   : std::exp(-res.alpha_fit.alpha_hat);

  // per-group rows (input order) and the column-means row
  const std::size_t k = d.k();
  res.rows.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    GroupRow& r = res.rows[j];
    r.obs_mean = d.obs_mean(j);
    r.n_or_se = d.se_or_n[j];
    if (!d.prior_known() && d.m() > 1) {
      for (std::size_t c = 1; c < d.m(); ++c) r.covariates.push_back(d.X(j, c));
    }
    r.prior_mean = res.effects.mean[j];
    r.shrinkage = res.shrink.b_point[j];
    r.low = res.posterior.lower[j];
    r.post_mean = res.posterior.point[j];
    r.upp = res.posterior.upper[j];
    r.post_sd = res.posterior.sd[j];
  }
  GroupRow mean;
  mean.covariates.assign(res.rows[0].covariates.size(), 0.0);
  for (const GroupRow& r : res.rows) {
    mean.obs_mean += r.obs_mean / k;
    mean.n_or_se += r.n_or_se / k;
    for (std::size_t c = 0; c < r.covariates.size(); ++c)
      mean.covariates[c] += r.covariates[c] / k;
    mean.prior_mean += r.prior_mean / k;
    mean.shrinkage += r.shrinkage / k;
    mean.low += r.low / k;
    mean.post_mean += r.post_mean / k;
    mean.upp += r.upp / k;
    mean.post_sd += r.post_sd / k;
  }
  res.mean_row = mean;
  res.display_order = detail::sorted_order(d);
  return res;
}

}  // namespace gbp
