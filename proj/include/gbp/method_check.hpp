#pragma once

// Frequency method checking: a parametric bootstrap that fixes the
// hyper-parameters at generative values, simulates random effects and data,
// refits each replicate with the original configuration, and estimates
// per-group interval coverage two ways:
//   simple: mean of indicators 1{effect in open interval}
//   RB:     mean of exact conditional interval probabilities
//           F(upper) - F(lower) under the conditional posterior evaluated at
//           the generative hyper-parameters
// Simulations run on a worker pool; per-sim streams are keyed by the sim
// index and the reduction is in ascending index order, so results are
// reproducible regardless of scheduling.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gbp/errors.hpp"
#include "gbp/fit.hpp"
#include "gbp/math/sampling.hpp"
#include "gbp/model.hpp"

namespace gbp {

struct GenerativeSpec {
  double a_or_r = 0.0;  // A (gaussian) or r (poisson/binomial)
  Vec reg_coef;         // exactly one of reg_coef / prior_mean is present
  Vec prior_mean;
  std::size_t nsim = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;

  void validate(const Dataset& d) const {
    if (!(a_or_r > 0.0)) throw config_error("generative A or r must be positive");
    if (nsim == 0) throw config_error("nsim must be positive");
    if (reg_coef.empty() == prior_mean.empty())
      throw config_error("exactly one of reg-coef / prior-mean must be given");
    if (!reg_coef.empty() && d.prior_known())
      throw config_error("reg-coef given but the fitted model used known prior means");
    if (!reg_coef.empty() && reg_coef.size() != d.m())
      throw config_error("reg-coef length does not match the design matrix");
    if (!prior_mean.empty() && prior_mean.size() != d.k())
      throw config_error("prior-mean length does not match the group count");
  }
};

struct CoverageReport {
  Vec coverage_rb, se_coverage_rb;
  Vec coverage_s, se_coverage_s;
  double overall_rb = 0.0, se_overall_rb = 0.0;
  GenerativeSpec spec;
  std::size_t nsim_attempted = 0;
  std::size_t nsim_failed = 0;
  std::size_t effective_nsim() const { return nsim_attempted - nsim_failed; }
};

// Fill unspecified generative values from a fit (posterior modes, or medians
// when the fit came from the A-R sampler) per the checking defaults.
inline GenerativeSpec resolve_generative_spec(const RunResult& fit, const Dataset& d,
                                              std::optional<double> a_or_r,
                                              Vec reg_coef, Vec prior_mean,
                                              std::size_t nsim, std::uint64_t seed) {
  GenerativeSpec spec;
  spec.a_or_r = a_or_r ? *a_or_r : fit.hyper.post_mode_a_or_r;
  spec.nsim = nsim;
  spec.confidence = fit.adm.options.confidence;
  spec.seed = seed;
  if (!reg_coef.empty() || !prior_mean.empty()) {
    if (prior_mean.size() == 1) prior_mean.assign(d.k(), prior_mean[0]);
    spec.reg_coef = std::move(reg_coef);
    spec.prior_mean = std::move(prior_mean);
  } else if (d.prior_known()) {
    spec.prior_mean = d.prior_mean;
  } else if (fit.samples) {
    spec.reg_coef = fit.beta_median;
  } else if (fit.adm.gls) {
    spec.reg_coef = fit.adm.gls->beta_hat;
  } else if (fit.adm.profile) {
    spec.reg_coef = fit.adm.profile->beta_hat;
  }
  spec.validate(d);
  return spec;
}

namespace detail {
// expected random effects at the generative hyper-parameters
inline Vec generative_prior_means(const Dataset& d, const GenerativeSpec& spec) {
  if (!spec.prior_mean.empty()) return spec.prior_mean;
  Vec out(d.k());
  for (std::size_t j = 0; j < d.k(); ++j) {
    double xb = dot_row(d, j, spec.reg_coef);
    out[j] = d.kind == ModelKind::binomial ? logistic(xb) : xb;
  }
  return out;
}
}  // namespace detail

struct PseudoData {
  Vec true_effects;
  Vec y_sim;
};

// Draw one replicate: effects from the conjugate prior at the generative
// hyper-parameters, then data from the first-level model.
inline PseudoData generate_pseudo_data(const Dataset& d, const GenerativeSpec& spec,
                                       std::size_t sim_index) {
  constexpr std::uint64_t kSimDomain = 11;
  RngStream stream(spec.seed, (kSimDomain << 48) | sim_index);
  const Vec prior = detail::generative_prior_means(d, spec);
  PseudoData out;
  out.true_effects.resize(d.k());
  out.y_sim.resize(d.k());
  for (std::size_t j = 0; j < d.k(); ++j) {
    switch (d.kind) {
      case ModelKind::gaussian: {
        const double a = spec.a_or_r;
        double mu = a > 0.0 ? sample_normal(stream, prior[j], std::sqrt(a)) : prior[j];
        out.true_effects[j] = mu;
        out.y_sim[j] = sample_normal(stream, mu, d.se_or_n[j]);
        break;
      }
      case ModelKind::poisson: {
        double lambda = sample_gamma(stream, spec.a_or_r * prior[j], spec.a_or_r);
        out.true_effects[j] = lambda;
        out.y_sim[j] = static_cast<double>(sample_poisson(stream, d.n(j) * lambda));
        break;
      }
      case ModelKind::binomial: {
        const double r = std::min(spec.a_or_r, 1e12);
        double p = sample_beta(stream, r * prior[j], r * (1.0 - prior[j]));
        out.true_effects[j] = p;
        out.y_sim[j] = static_cast<double>(
            sample_binomial(stream, static_cast<std::int64_t>(d.n(j)), p));
        break;
      }
    }
  }
  return out;
}

// 1 iff the effect lies strictly inside the open interval.
inline int coverage_indicator(double true_effect, double lower, double upper) {
  return (lower < true_effect && true_effect < upper) ? 1 : 0;
}

// P(effect_j in (lower, upper) | generative hyper-params, simulated data)
inline double rb_coverage_term(const Dataset& d_sim, const GenerativeSpec& spec,
                               double lower, double upper, std::size_t j) {
  if (!(upper > lower)) return 0.0;
  const double alpha = d_sim.kind == ModelKind::gaussian ? std::log(spec.a_or_r)
                                                         : -std::log(spec.a_or_r);
  HyperParams h{alpha, spec.reg_coef};
  ConditionalPosterior post =
      conditional_posterior(d_sim, h, detail::generative_prior_means(d_sim, spec));
  return post.cdf(j, upper) - post.cdf(j, lower);
}

inline unsigned coverage_worker_count(std::size_t nsim, unsigned requested = 0) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("GBP_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<unsigned>(v);
    }
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (n > nsim) n = static_cast<unsigned>(nsim);
  return n;
}

// Run the full parametric bootstrap. `settings` must be the configuration of
// the original fit; its alpha mode seeds the refit brackets.
inline CoverageReport run_coverage(const Dataset& d, const RunSettings& settings,
                                   const GenerativeSpec& spec,
                                   double bracket_center,
                                   unsigned threads = 0) {
  spec.validate(d);
  const std::size_t k = d.k(), nsim = spec.nsim;
  std::vector<Vec> rb(nsim), simple(nsim);
  std::vector<char> failed(nsim, 0);

  auto one_sim = [&](std::size_t i) {
    PseudoData pd = generate_pseudo_data(d, spec, i);
    Dataset sim = d;
    sim.y = pd.y_sim;
    try {
      RunSettings refit_settings = settings;
      refit_settings.seed = spec.seed ^ (0x5851F42D4C957F2DULL + i);
      refit_settings.sort = false;
      throw_if_invalid(sim);
      FitOptions opts;
      opts.confidence = spec.confidence;
      opts.normal_ci = settings.normal_ci;
      opts.prior = settings.prior;
      opts.bracket_center = bracket_center;
      Vec lower(k), upper(k);
      if (settings.n_ar > 0) {
        RunResult rr = run_fit(sim, refit_settings);
        for (std::size_t j = 0; j < k; ++j) {
          lower[j] = rr.rows[j].low;
          upper[j] = rr.rows[j].upp;
        }
      } else {
        FitResult fr = fit(sim, opts);
        lower = fr.posterior.lower;
        upper = fr.posterior.upper;
      }
      rb[i].resize(k);
      simple[i].resize(k);
      for (std::size_t j = 0; j < k; ++j) {
        rb[i][j] = rb_coverage_term(sim, spec, lower[j], upper[j], j);
        simple[i][j] = coverage_indicator(pd.true_effects[j], lower[j], upper[j]);
      }
    } catch (const std::exception&) {
      failed[i] = 1;
    }
  };

  const unsigned nworkers = coverage_worker_count(nsim, threads);
  if (nworkers <= 1) {
    for (std::size_t i = 0; i < nsim; ++i) one_sim(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (unsigned w = 0; w < nworkers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= nsim) break;
          one_sim(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  CoverageReport rep;
  rep.spec = spec;
  rep.nsim_attempted = nsim;
  for (char f : failed) rep.nsim_failed += f;
  const std::size_t n_eff = rep.effective_nsim();
  if (rep.nsim_failed * 20 > nsim)
    throw fit_error("coverage: more than 5% of simulation refits failed (" +
                    std::to_string(rep.nsim_failed) + "/" + std::to_string(nsim) + ")");
  if (n_eff < 2) throw fit_error("coverage: not enough successful simulations");

  rep.coverage_rb.assign(k, 0.0);
  rep.se_coverage_rb.assign(k, 0.0);
  rep.coverage_s.assign(k, 0.0);
  rep.se_coverage_s.assign(k, 0.0);
  // reduction in ascending sim order
  for (std::size_t j = 0; j < k; ++j) {
    double mean_rb = 0.0, mean_s = 0.0;
    for (std::size_t i = 0; i < nsim; ++i) {
      if (failed[i]) continue;
      mean_rb += rb[i][j];
      mean_s += simple[i][j];
    }
    mean_rb /= static_cast<double>(n_eff);
    mean_s /= static_cast<double>(n_eff);
    double var_rb = 0.0, var_s = 0.0;
    for (std::size_t i = 0; i < nsim; ++i) {
      if (failed[i]) continue;
      var_rb += (rb[i][j] - mean_rb) * (rb[i][j] - mean_rb);
      var_s += (simple[i][j] - mean_s) * (simple[i][j] - mean_s);
    }
    var_rb /= static_cast<double>(n_eff) * static_cast<double>(n_eff - 1);
    var_s /= static_cast<double>(n_eff) * static_cast<double>(n_eff - 1);
    rep.coverage_rb[j] = mean_rb;
    rep.se_coverage_rb[j] = std::sqrt(var_rb);
    rep.coverage_s[j] = mean_s;
    rep.se_coverage_s[j] = std::sqrt(var_s);
  }
  double sum_rb = 0.0, sum_var = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    sum_rb += rep.coverage_rb[j];
    sum_var += rep.se_coverage_rb[j] * rep.se_coverage_rb[j];
  }
  rep.overall_rb = sum_rb / static_cast<double>(k);
  rep.se_overall_rb = std::sqrt(sum_var / (static_cast<double>(k) * static_cast<double>(k)));
  return rep;
}

}  // namespace gbp
