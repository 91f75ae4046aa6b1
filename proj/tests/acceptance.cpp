// Acceptance suite: exercises the full pipeline against the published
// results for the three bundled datasets and prints one PASS/FAIL line per
// criterion. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gbp/gbp.hpp"

using namespace gbp;

namespace {

int failures = 0;

struct Criterion {
  std::string name;
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol)) {
      ok = false;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s: got %.6g, want %.6g +- %.2g", what.c_str(),
                    got, want, tol);
      notes.push_back(buf);
    }
  }
  void finish() {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    for (const std::string& n : notes) std::printf("        %s\n", n.c_str());
    if (!ok) ++failures;
  }
};

Dataset hospital() {
  std::vector<double> y = {3, 2, 5, 11, 9, 12, 12, 4, 10, 13, 14, 7, 12, 11, 13, 22,
                           15, 11, 14, 11, 16, 14, 9, 15, 13, 35, 26, 25, 20, 35, 27};
  std::vector<double> n = {67, 68, 210, 256, 269, 274, 278, 295, 347, 349, 358,
                           396, 431, 441, 477, 484, 494, 501, 505, 540, 563, 593,
                           602, 629, 636, 729, 849, 914, 940, 1193, 1340};
  return make_dataset(ModelKind::poisson, y, n, {}, {0.03});
}

Dataset schools() {
  return make_dataset(ModelKind::gaussian, {28, 8, -3, 7, -1, 1, 18, 12},
                      {15, 10, 16, 11, 9, 11, 10, 18});
}

Dataset baseball() {
  std::vector<double> y = {18, 17, 16, 15, 14, 14, 13, 12, 11,
                           11, 10, 10, 10, 10, 10, 9, 8, 7};
  std::vector<double> x = {1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0};
  Mat cov(18, 1);
  for (int i = 0; i < 18; ++i) cov(i, 0) = x[i];
  return make_dataset(ModelKind::binomial, y, std::vector<double>(18, 45.0), cov);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  // ---- 1. hospital fit ----------------------------------------------------
  {
    Criterion c;
    c.name = "criterion 1: hospital Poisson fit matches the published outputs";
    auto t0 = std::chrono::steady_clock::now();
    FitResult res = fit(hospital());
    double secs = seconds_since(t0);
    c.expect_near(res.hyper.post_mode_alpha, -6.53, 0.05, "post.mode.alpha");
    c.expect_near(res.hyper.post_sd_alpha, 0.576, 0.02, "post.sd.alpha");
    c.expect(std::fabs(res.hyper.post_mode_a_or_r - 684.0) <= 0.02 * 684.0,
             "r-hat within 2% of 684");
    c.expect_near(res.rows[0].shrinkage, 0.911, 0.005, "group-1 shrinkage");
    c.expect_near(res.rows[0].post_mean, 0.0313, 0.0005, "group-1 post.mean");
    c.expect_near(res.rows[0].low, 0.0199, 0.001, "group-1 lower");
    c.expect_near(res.rows[0].upp, 0.0454, 0.001, "group-1 upper");
    c.expect_near(res.mean_row.shrinkage, 0.600, 0.005, "mean-row shrinkage");
    c.expect(secs < 1.0, "runtime under 1 s");
    c.finish();
  }

  // ---- 2. schools fit -----------------------------------------------------
  {
    Criterion c;
    c.name = "criterion 2: schools Gaussian fit matches the published outputs";
    auto t0 = std::chrono::steady_clock::now();
    FitResult res = fit(schools());
    double secs = seconds_since(t0);
    c.expect_near(res.hyper.post_mode_alpha, 4.77, 0.05, "post.mode.alpha");
    c.expect_near(res.regression.estimate[0], 8.168, 0.05, "beta1");
    c.expect_near(res.regression.se[0], 5.73, 0.1, "se(beta1)");
    c.expect_near(res.regression.p[0], 0.154, 0.01, "p(beta1)");
    c.expect_near(res.rows[4].post_mean, 2.74, 0.1, "school-5 post.mean");
    c.expect_near(res.rows[4].post_sd, 7.63, 0.1, "school-5 post.sd");
    c.expect_near(res.rows[4].low, -13.30, 0.3, "school-5 lower");
    c.expect_near(res.rows[4].upp, 16.7, 0.3, "school-5 upper");
    c.expect(secs < 1.0, "runtime under 1 s");
    c.finish();
  }

  // ---- 3. baseball fit ----------------------------------------------------
  {
    Criterion c;
    c.name = "criterion 3: baseball Binomial fit matches the published outputs";
    auto t0 = std::chrono::steady_clock::now();
    FitResult res = fit(baseball());
    double secs = seconds_since(t0);
    c.expect_near(res.hyper.post_mode_alpha, -4.73, 0.05, "post.mode.alpha");
    c.expect_near(res.regression.estimate[0], -1.194, 0.02, "beta1");
    c.expect_near(res.regression.estimate[1], 0.389, 0.02, "beta2");
    c.expect_near(res.regression.z[0], -9.129, 0.1, "z1");
    c.expect_near(res.regression.z[1], 2.074, 0.1, "z2");
    for (std::size_t j = 0; j < 18; ++j)
      c.expect(std::fabs(res.rows[j].shrinkage - 0.715) <= 0.005,
               "shrinkage 0.715 for player " + std::to_string(j + 1));
    c.expect_near(res.rows[0].post_mean, 0.335, 0.003, "player-1 post.mean");
    c.expect_near(res.rows[0].low, 0.248, 0.005, "player-1 lower");
    c.expect_near(res.rows[0].upp, 0.429, 0.005, "player-1 upper");
    c.expect(secs < 1.0, "runtime under 1 s");
    c.finish();
  }

  // ---- 4. coverage reproduction -------------------------------------------
  {
    Criterion c;
    c.name = "criterion 4: frequency method checking reproduces the published coverage rates";
    auto t0 = std::chrono::steady_clock::now();

    Dataset dh = hospital();
    RunSettings sh;
    sh.model = ModelKind::poisson;
    RunResult fh = run_fit(dh, sh);
    GenerativeSpec spech = resolve_generative_spec(fh, dh, {}, {}, {}, 1000, 20240810);
    CoverageReport ch = run_coverage(dh, sh, spech, fh.hyper.post_mode_alpha);
    c.expect_near(ch.overall_rb, 0.955, 0.01, "hospital overall RB");
    double minrb = 1.0;
    for (double v : ch.coverage_rb) minrb = std::min(minrb, v);
    c.expect(minrb >= 0.945, "hospital minimum group RB >= 0.945");
    double ratio = (ch.se_coverage_s[0] * ch.se_coverage_s[0]) /
                   (ch.se_coverage_rb[0] * ch.se_coverage_rb[0]);
    c.expect(ratio >= 9.5 && ratio <= 38.0,
             "hospital group-1 simple/RB variance ratio ~19 (got " +
                 std::to_string(ratio) + ")");

    Dataset db = baseball();
    RunSettings sb;
    sb.model = ModelKind::binomial;
    RunResult fb = run_fit(db, sb);
    GenerativeSpec specb = resolve_generative_spec(fb, db, {}, {}, {}, 1000, 20240811);
    CoverageReport cb = run_coverage(db, sb, specb, fb.hyper.post_mode_alpha);
    c.expect_near(cb.overall_rb, 0.972, 0.01, "baseball overall RB");

    Dataset dg = schools();
    RunSettings sg;
    sg.model = ModelKind::gaussian;
    RunResult fg = run_fit(dg, sg);
    GenerativeSpec specg = resolve_generative_spec(fg, dg, {}, {}, {}, 1000, 20240812);
    CoverageReport cg = run_coverage(dg, sg, specg, fg.hyper.post_mode_alpha);
    for (std::size_t j = 0; j < cg.coverage_rb.size(); ++j)
      c.expect(cg.coverage_rb[j] >= 0.95 && cg.coverage_rb[j] <= 0.98,
               "schools group " + std::to_string(j + 1) + " RB in [0.95, 0.98] (got " +
                   std::to_string(cg.coverage_rb[j]) + ")");
    double secs = seconds_since(t0);
    c.expect(secs < 180.0, "runtime under 3 minutes");
    c.finish();
  }

  // ---- 5. oracle identities ------------------------------------------------
  {
    Criterion c;
    c.name = "criterion 5: oracle and moment identities hold";
    // marginal pmf normalization at k = 1
    {
      double total = 0.0;
      for (int y = 0; y <= 200; ++y) {
        Dataset d = make_dataset(ModelKind::poisson, {double(y)}, {67.0}, {}, {0.03});
        total += std::exp(poisson_log_marginal(d, 684.0));
      }
      c.expect(std::fabs(total - 1.0) <= 1e-8, "negative-binomial pmf normalizes");
      total = 0.0;
      for (int y = 0; y <= 45; ++y) {
        Dataset d = make_dataset(ModelKind::binomial, {double(y)}, {45.0}, {}, {0.267});
        total += std::exp(binomial_log_marginal(d, 113.0, {}));
      }
      c.expect(std::fabs(total - 1.0) <= 1e-8, "beta-binomial pmf normalizes");
    }
    // shrinkage Beta matching identities
    {
      AlphaFit fa = fit_alpha(hospital());
      ShrinkageApprox shr = shrinkage_approx(fa, hospital());
      for (std::size_t j = 0; j < shr.a1.size(); ++j) {
        c.expect(std::fabs(shr.e_b(j) - shr.b_point[j]) <= 1e-12,
                 "Beta mean equals B'");
        c.expect(std::fabs(shr.var_b(j) - variance_of_shrinkage(fa, shr.b_point[j])) <=
                     1e-12, "Beta variance equals the invariant-information form");
        c.expect(std::fabs(shr.moment(j, 1.0) - shr.e_b(j)) <= 1e-9,
                 "log-beta moment route agrees");
      }
    }
    // matched-family moment identities (Gamma and Beta matching)
    {
      FitResult hp = fit(hospital());
      for (std::size_t j = 0; j < hp.rows.size(); ++j) {
        double shape = hp.posterior.par1[j], rate = hp.posterior.par2[j];
        c.expect(std::fabs(shape / rate - hp.rows[j].post_mean) <= 1e-9,
                 "Gamma mean identity");
        c.expect(std::fabs(shape / (rate * rate) -
                           hp.rows[j].post_sd * hp.rows[j].post_sd) <= 1e-9,
                 "Gamma variance identity");
      }
      FitResult bb = fit(baseball());
      for (std::size_t j = 0; j < bb.rows.size(); ++j) {
        double t1 = bb.posterior.par1[j], t0 = bb.posterior.par2[j];
        double mean = t1 / (t1 + t0);
        double var = t1 * t0 / ((t1 + t0) * (t1 + t0) * (t1 + t0 + 1.0));
        c.expect(std::fabs(mean - bb.rows[j].post_mean) <= 1e-9, "Beta mean identity");
        c.expect(std::fabs(var - bb.rows[j].post_sd * bb.rows[j].post_sd) <= 1e-9,
                 "Beta variance identity");
      }
    }
    // quantile round trips
    {
      bool ok = true;
      for (int i = 1; i <= 999; i += 11) {
        double p = i / 1000.0;
        ok = ok && std::fabs(gamma_cdf(gamma_quantile(p, 3.0, 2.0), 3.0, 2.0) - p) <= 1e-9;
        ok = ok && std::fabs(beta_cdf(beta_quantile(p, 2.0, 5.0), 2.0, 5.0) - p) <= 1e-9;
        ok = ok && std::fabs(normal_cdf(normal_quantile(p)) - p) <= 1e-9;
      }
      c.expect(ok, "quantile/cdf round trips at 1e-9");
    }
    // Monte Carlo cumulant oracle for the Gaussian skew fit (school 5)
    {
      Dataset d = schools();
      AlphaFit fa = fit_alpha(d);
      ShrinkageApprox shr = shrinkage_approx(fa, d);
      ExpectedEffectMoments eff = expected_effect_moments_gaussian(d, fa.alpha_hat);
      RandomEffectPosterior post = match_random_effect_gaussian(d, shr, eff, false, 0.95);
      const std::size_t j = 4;
      RngStream stream(99, 0);
      const int batches = 20, per = 50000;
      std::vector<double> m2s(batches), m3s(batches);
      for (int b = 0; b < batches; ++b) {
        double s2 = 0, s3 = 0;
        for (int i = 0; i < per; ++i) {
          double bb = sample_beta(stream, shr.a1[j], shr.a0[j]);
          double mu = (1 - bb) * d.y[j] + bb * eff.mean[j] +
                      shr.e_b(j) * sample_normal(stream, 0.0, std::sqrt(eff.var[j])) +
                      sample_normal(stream, 0.0, std::sqrt((1 - bb) * d.V(j)));
          double dm = mu - post.point[j];
          s2 += dm * dm;
          s3 += dm * dm * dm;
        }
        m2s[b] = s2 / per;
        m3s[b] = s3 / per;
      }
      auto stat = [&](const std::vector<double>& v, double& m, double& se) {
        m = 0;
        for (double x : v) m += x / batches;
        double var = 0;
        for (double x : v) var += (x - m) * (x - m);
        se = std::sqrt(var / (batches * (batches - 1.0)));
      };
      double m2, m2se, m3, m3se;
      stat(m2s, m2, m2se);
      stat(m3s, m3, m3se);
      c.expect(std::fabs(post.sd[j] * post.sd[j] - m2) <= 3.0 * m2se,
               "Gaussian c2 within 3 MC standard errors");
      double delta = post.sn[j].delta, omega = post.sn[j].scale;
      double muz = delta * std::sqrt(2.0 / pi);
      double c3 = (4.0 - pi) / 2.0 * muz * muz * muz * omega * omega * omega;
      c.expect(std::fabs(c3 - m3) <= 3.0 * m3se,
               "Gaussian c3 within 3 MC standard errors");
    }
    // Monte Carlo oracle for the Binomial unconditional mean/variance
    {
      Dataset d = baseball();
      AlphaFit fa = fit_alpha(d);
      ShrinkageApprox shr = shrinkage_approx(fa, d);
      BinomialProfile prof = binomial_profile_beta(d, fa.alpha_hat);
      ExpectedEffectMoments eff = expected_effect_moments_binomial(d, prof);
      RandomEffectPosterior post = match_random_effect_binomial(d, shr, eff, 0.95);
      const std::size_t j = 0;
      RngStream stream(77, 0);
      const int batches = 20, per = 50000;
      std::vector<double> means(batches), m2s(batches), taylors(batches);
      for (int b = 0; b < batches; ++b) {
        double sm = 0, sv = 0, st = 0;
        for (int i = 0; i < per; ++i) {
          double bb = sample_beta(stream, shr.a1[j], shr.a0[j]);
          double pe = sample_beta(stream, eff.b1[j], eff.b0[j]);
          double r = d.n(j) * bb / (1 - bb);
          double p = sample_beta(stream, d.y[j] + r * pe,
                                 d.n(j) - d.y[j] + r * (1 - pe));
          double pstar = (1 - bb) * d.obs_mean(j) + bb * pe;
          st += pstar * (1 - pstar) * (1 - bb) / d.n(j);
          sm += p;
          sv += p * p;
        }
        means[b] = sm / per;
        m2s[b] = sv / per;
        taylors[b] = st / per;
      }
      auto stat = [&](const std::vector<double>& v, double& m, double& se) {
        m = 0;
        for (double x : v) m += x / batches;
        double var = 0;
        for (double x : v) var += (x - m) * (x - m);
        se = std::sqrt(var / (batches * (batches - 1.0)));
      };
      double mmean, mse, m2mean, m2se, tmean, tse;
      stat(means, mmean, mse);
      stat(m2s, m2mean, m2se);
      stat(taylors, tmean, tse);
      c.expect(std::fabs(post.point[j] - mmean) <= 3.0 * mse,
               "Binomial mean within 3 MC standard errors");
      double var_mc = m2mean - mmean * mmean;
      double var_se = std::sqrt(m2se * m2se + 4 * mmean * mmean * mse * mse);
      double taylor_remainder = tmean / d.n(j);
      c.expect(std::fabs(post.sd[j] * post.sd[j] - var_mc) <=
                   3.0 * var_se + taylor_remainder,
               "Binomial variance within 3 MC standard errors plus the "
               "first-order Taylor remainder");
    }
    c.finish();
  }

  // ---- 6. acceptance-rejection correctness ---------------------------------
  {
    Criterion c;
    c.name = "criterion 6: acceptance-rejection sampler";
    Dataset d = baseball();
    EnvelopeSpec env = build_envelope(d);
    // unit-weight synthetic: acceptance probability exactly 1
    ArTarget self = [&](double a, const Vec& b) {
      double lw = skew_t_log_density(a, env.g1);
      if (!b.empty()) lw += mvt4_log_density(b, env.xi, env.S);
      return lw;
    };
    PosteriorSample unit = ar_sample(d, env, 400, 4, RngStream(3, 0), {}, self);
    c.expect(unit.refill_rounds == 0 && std::fabs(unit.acceptance_rate - 1.0) < 1e-12,
             "unit-weight synthetic accepts at rate 1");

    // baseball run: sample means track the ADM means
    RunSettings settings;
    settings.model = ModelKind::binomial;
    settings.n_ar = 2000;
    settings.seed = 424242;
    RunResult rr = run_fit(d, settings);
    FitResult adm = rr.adm;
    const PosteriorSample& s = *rr.samples;
    c.expect(s.alpha_draws.size() == 2000 && s.weights.size() >= 8000,
             "sample shapes (2000 draws from >= 8000 trials)");
    for (std::size_t j = 0; j < 18; ++j) {
      double m = 0;
      for (std::size_t i = 0; i < 2000; ++i) m += s.p_draws(j, i);
      m /= 2000.0;
      double v = 0;
      for (std::size_t i = 0; i < 2000; ++i)
        v += (s.p_draws(j, i) - m) * (s.p_draws(j, i) - m);
      v /= 1999.0;
      c.expect(std::fabs(adm.rows[j].post_mean - m) <=
                   3.0 * std::sqrt(v / 2000.0) + 0.003,
               "p mean close to ADM for player " + std::to_string(j + 1));
    }
    // bit reproducibility
    RunResult rr2 = run_fit(d, settings);
    c.expect(rr2.samples->alpha_draws == s.alpha_draws &&
                 rr2.samples->weights == s.weights,
             "bit-reproducible under a fixed seed");

    // chi-square goodness of fit of the alpha marginal on a small dataset
    {
      Dataset sd = make_dataset(ModelKind::binomial, {3, 5, 2, 7, 4, 6, 3, 5},
                                {12, 15, 10, 18, 14, 16, 11, 13});
      EnvelopeSpec senv = build_envelope(sd);
      PosteriorSample ss = ar_sample(sd, senv, 4000, 4, RngStream(31337, 0));
      BinomialProfile prof = binomial_profile_beta(sd, senv.joint_mode.alpha);
      const double bse = std::sqrt(prof.sigma_hat(0, 0));
      const double bc = prof.beta_hat[0];
      auto marginal = [&](double a) {
        double cc = log_hyper_posterior(sd, HyperParams{a, {bc}});
        return std::exp(cc) * integrate([&](double b) {
          return std::exp(log_hyper_posterior(sd, HyperParams{a, {b}}) - cc);
        }, bc - 12.0 * bse, bc + 12.0 * bse, 1e-12);
      };
      const int nbins = 20;
      Vec sorted = ss.alpha_draws;
      std::sort(sorted.begin(), sorted.end());
      double lo = sorted[40], hi = sorted[4000 - 41];
      std::vector<double> edges(nbins + 1);
      for (int b = 0; b <= nbins; ++b) edges[b] = lo + (hi - lo) * b / nbins;
      std::vector<double> expectp(nbins);
      double total = 0.0;
      for (int b = 0; b < nbins; ++b) {
        double a0 = b == 0 ? lo - 8.0 : edges[b];
        double a1 = b == nbins - 1 ? hi + 8.0 : edges[b + 1];
        expectp[b] = integrate(marginal, a0, a1, 1e-14);
        total += expectp[b];
      }
      std::vector<int> observed(nbins, 0);
      for (double a : ss.alpha_draws) {
        int b = 0;
        while (b < nbins - 1 && a >= edges[b + 1]) ++b;
        ++observed[b];
      }
      double chi2 = 0.0;
      for (int b = 0; b < nbins; ++b) {
        double e = 4000.0 * expectp[b] / total;
        chi2 += (observed[b] - e) * (observed[b] - e) / e;
      }
      double pval = 1.0 - gamma_cdf(chi2, 19.0 / 2.0, 0.5);
      c.expect(pval > 0.001, "alpha marginal chi-square p > 0.001 (got " +
                                 std::to_string(pval) + ")");
    }
    c.finish();
  }

  // ---- 7. propriety gates ---------------------------------------------------
  {
    Criterion c;
    c.name = "criterion 7: propriety gate fixtures are rejected by name";
    Dataset b = make_dataset(ModelKind::binomial, {0, 10, 5}, {10, 10, 9});
    ValidationReport rb = validate_dataset(b);
    c.expect(!rb.ok && rb.issues[0].rule == "at least two interior groups",
             "single-interior-group Binomial rejected");
    Dataset p = make_dataset(ModelKind::poisson, {0, 0, 0}, {10, 20, 30}, {}, {0.5});
    ValidationReport rp = validate_dataset(p);
    c.expect(!rp.ok && rp.issues[0].rule == "at least two non-zero groups",
             "all-zero Poisson rejected");
    Dataset g = make_dataset(ModelKind::gaussian, {1, 2, 3}, {1, 1, 1});
    ValidationReport rg = validate_dataset(g);
    c.expect(!rg.ok && rg.issues[0].rule == "k >= m+3", "tiny Gaussian rejected");
    c.finish();
  }

  if (failures > 0) {
    std::printf("\n%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("\nall acceptance criteria passed\n");
  return 0;
}
