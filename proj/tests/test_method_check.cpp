#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gbp/method_check.hpp"

using namespace gbp;
using Catch::Matchers::WithinAbs;

namespace {

Dataset hospital() {
  std::vector<double> y = {3, 2, 5, 11, 9, 12, 12, 4, 10, 13, 14, 7, 12, 11, 13, 22,
                           15, 11, 14, 11, 16, 14, 9, 15, 13, 35, 26, 25, 20, 35, 27};
  std::vector<double> n = {67, 68, 210, 256, 269, 274, 278, 295, 347, 349, 358,
                           396, 431, 441, 477, 484, 494, 501, 505, 540, 563, 593,
                           602, 629, 636, 729, 849, 914, 940, 1193, 1340};
  return make_dataset(ModelKind::poisson, y, n, {}, {0.03});
}

GenerativeSpec hospital_spec(std::size_t nsim, std::uint64_t seed) {
  GenerativeSpec spec;
  spec.a_or_r = 683.5;
  spec.prior_mean.assign(31, 0.03);
  spec.nsim = nsim;
  spec.confidence = 0.95;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("generative spec validation") {
  Dataset d = hospital();
  GenerativeSpec spec = hospital_spec(100, 1);
  spec.nsim = 0;
  CHECK_THROWS_AS(spec.validate(d), config_error);
  spec = hospital_spec(100, 1);
  spec.reg_coef = {1.0};  // both present
  CHECK_THROWS_AS(spec.validate(d), config_error);
  spec = hospital_spec(100, 1);
  spec.a_or_r = -1.0;
  CHECK_THROWS_AS(spec.validate(d), config_error);
  spec = hospital_spec(100, 1);
  spec.prior_mean = {0.03};  // wrong length
  CHECK_THROWS_AS(spec.validate(d), config_error);
}

TEST_CASE("pseudo-data generation is deterministic per sim index") {
  Dataset d = hospital();
  GenerativeSpec spec = hospital_spec(10, 77);
  PseudoData a = generate_pseudo_data(d, spec, 3);
  PseudoData b = generate_pseudo_data(d, spec, 3);
  CHECK(a.true_effects == b.true_effects);
  CHECK(a.y_sim == b.y_sim);
  PseudoData c = generate_pseudo_data(d, spec, 4);
  CHECK(a.true_effects != c.true_effects);
}

TEST_CASE("gaussian pseudo-data: A = 0 pins effects to the prior means") {
  Dataset d = make_dataset(ModelKind::gaussian, {1, 2, 3, 4}, {1, 1, 1, 1}, {},
                           {5.0, 6.0, 7.0, 8.0});
  GenerativeSpec spec;
  spec.a_or_r = 1e-300;  // validation requires positive; the draw floor is 0
  spec.prior_mean = {5.0, 6.0, 7.0, 8.0};
  spec.nsim = 1;
  spec.seed = 9;
  PseudoData pd = generate_pseudo_data(d, spec, 0);
  for (int j = 0; j < 4; ++j)
    CHECK_THAT(pd.true_effects[j], WithinAbs(spec.prior_mean[j], 1e-10));
}

TEST_CASE("binomial pseudo-data: huge r pins effects to the prior mean") {
  Dataset d = make_dataset(ModelKind::binomial, {3, 5}, {10, 12}, {}, {0.4});
  GenerativeSpec spec;
  spec.a_or_r = 1e15;  // clamped to 1e12 inside
  spec.prior_mean = {0.4, 0.4};
  spec.nsim = 1;
  spec.seed = 10;
  for (std::size_t i = 0; i < 5; ++i) {
    PseudoData pd = generate_pseudo_data(d, spec, i);
    CHECK_THAT(pd.true_effects[0], WithinAbs(0.4, 3e-6));
    CHECK_THAT(pd.true_effects[1], WithinAbs(0.4, 3e-6));
  }
}

TEST_CASE("poisson pseudo-data: prior-mean oracle over many sims") {
  Dataset d = make_dataset(ModelKind::poisson, {3}, {67}, {}, {0.03});
  GenerativeSpec spec;
  spec.a_or_r = 684.0;
  spec.prior_mean = {0.03};
  spec.nsim = 1;
  spec.seed = 11;
  const int nsim = 100000;
  double sum = 0.0;
  for (int i = 0; i < nsim; ++i)
    sum += generate_pseudo_data(d, spec, i).true_effects[0];
  double mean = sum / nsim;
  // prior sd = sqrt(lamE / r); 3 MC standard errors
  double mc_se = std::sqrt(0.03 / 684.0 / nsim);
  CHECK_THAT(mean, WithinAbs(0.03, 3.0 * mc_se));
}

TEST_CASE("coverage indicator is the strict open-interval test") {
  CHECK(coverage_indicator(0.5, 0.0, 1.0) == 1);
  CHECK(coverage_indicator(1.0, 0.0, 1.0) == 0);  // boundary excluded
  CHECK(coverage_indicator(0.0, 0.0, 1.0) == 0);
  CHECK(coverage_indicator(1.5, 0.0, 1.0) == 0);
}

TEST_CASE("rb coverage term equals the conditional posterior mass") {
  Dataset d = hospital();
  GenerativeSpec spec = hospital_spec(1, 0);
  // full support -> 1, empty interval -> 0
  CHECK_THAT(rb_coverage_term(d, spec, 0.0, 1e9, 0), WithinAbs(1.0, 1e-12));
  CHECK(rb_coverage_term(d, spec, 0.02, 0.02, 0) == 0.0);
  // direct Gamma(r lamE + y, r + n) oracle
  double lo = 0.02, hi = 0.04;
  double expected = gamma_cdf(hi, 683.5 * 0.03 + 3.0, 683.5 + 67.0) -
                    gamma_cdf(lo, 683.5 * 0.03 + 3.0, 683.5 + 67.0);
  CHECK_THAT(rb_coverage_term(d, spec, lo, hi, 0), WithinAbs(expected, 1e-12));
}

TEST_CASE("coverage run: determinism and estimator structure") {
  Dataset d = hospital();
  RunSettings settings;
  settings.model = ModelKind::poisson;
  GenerativeSpec spec = hospital_spec(60, 12345);
  CoverageReport a = run_coverage(d, settings, spec, -6.53, 1);
  CoverageReport b = run_coverage(d, settings, spec, -6.53, 1);
  CHECK(a.coverage_rb == b.coverage_rb);
  CHECK(a.se_coverage_rb == b.se_coverage_rb);
  CHECK(a.coverage_s == b.coverage_s);
  CHECK(a.overall_rb == b.overall_rb);

  // rb terms live in [0,1]; the overall is the unweighted mean
  double mean_rb = 0.0;
  for (double c : a.coverage_rb) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    mean_rb += c;
  }
  mean_rb /= static_cast<double>(a.coverage_rb.size());
  CHECK_THAT(a.overall_rb, WithinAbs(mean_rb, 1e-15));

  // Rao-Blackwellization reduces the average standard error
  double se_rb = 0.0, se_s = 0.0;
  for (std::size_t j = 0; j < a.coverage_rb.size(); ++j) {
    se_rb += a.se_coverage_rb[j];
    se_s += a.se_coverage_s[j];
  }
  CHECK(se_rb <= se_s);
}

TEST_CASE("coverage run matches across worker counts") {
  Dataset d = hospital();
  RunSettings settings;
  settings.model = ModelKind::poisson;
  GenerativeSpec spec = hospital_spec(40, 777);
  CoverageReport one = run_coverage(d, settings, spec, -6.53, 1);
  CoverageReport four = run_coverage(d, settings, spec, -6.53, 4);
  CHECK(one.coverage_rb == four.coverage_rb);
  CHECK(one.se_coverage_s == four.se_coverage_s);
  CHECK(one.overall_rb == four.overall_rb);
}

TEST_CASE("resolve_generative_spec fills defaults from the fit") {
  Dataset d = hospital();
  RunSettings settings;
  settings.model = ModelKind::poisson;
  RunResult fit = run_fit(d, settings);
  GenerativeSpec spec = resolve_generative_spec(fit, d, {}, {}, {}, 500, 42);
  CHECK_THAT(spec.a_or_r, WithinAbs(fit.hyper.post_mode_a_or_r, 1e-12));
  REQUIRE(spec.prior_mean.size() == 31);
  CHECK(spec.prior_mean[0] == 0.03);
  CHECK(spec.nsim == 500);

  // explicit overrides win
  GenerativeSpec spec2 = resolve_generative_spec(fit, d, 100.0, {}, {0.05}, 200, 1);
  CHECK(spec2.a_or_r == 100.0);
  CHECK(spec2.prior_mean[5] == 0.05);
}

TEST_CASE("gaussian coverage smoke run") {
  Dataset d = make_dataset(ModelKind::gaussian, {28, 8, -3, 7, -1, 1, 18, 12},
                           {15, 10, 16, 11, 9, 11, 10, 18});
  RunSettings settings;
  settings.model = ModelKind::gaussian;
  RunResult fit = run_fit(d, settings);
  GenerativeSpec spec = resolve_generative_spec(fit, d, {}, {}, {}, 80, 31337);
  CoverageReport rep = run_coverage(d, settings, spec, fit.hyper.post_mode_alpha, 0);
  CHECK(rep.nsim_failed == 0);
  CHECK(rep.overall_rb > 0.9);
  CHECK(rep.overall_rb < 1.0);
  for (double se : rep.se_coverage_rb) CHECK(se >= 0.0);
}

TEST_CASE("coverage of an acceptance-rejection fit reruns the sampler per sim") {
  Dataset d = make_dataset(ModelKind::binomial, {3, 5, 2, 7, 4, 6, 3, 5},
                           {12, 15, 10, 18, 14, 16, 11, 13});
  RunSettings settings;
  settings.model = ModelKind::binomial;
  settings.n_ar = 200;
  settings.seed = 5;
  RunResult fit = run_fit(d, settings);
  REQUIRE(fit.samples.has_value());
  GenerativeSpec spec = resolve_generative_spec(fit, d, {}, {}, {}, 8, 99);
  // generative coefficients default to the posterior medians
  REQUIRE(spec.reg_coef.size() == 1);
  CHECK_THAT(spec.reg_coef[0], WithinAbs(fit.beta_median[0], 1e-12));
  CoverageReport a = run_coverage(d, settings, spec, fit.adm.alpha_fit.alpha_hat, 1);
  CoverageReport b = run_coverage(d, settings, spec, fit.adm.alpha_fit.alpha_hat, 3);
  CHECK(a.coverage_rb == b.coverage_rb);
  CHECK(a.effective_nsim() == 8);
  for (double c : a.coverage_rb) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("binomial coverage smoke run with regression structure") {
  std::vector<double> y = {18, 17, 16, 15, 14, 14, 13, 12, 11,
                           11, 10, 10, 10, 10, 10, 9, 8, 7};
  std::vector<double> x = {1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0};
  Mat cov(18, 1);
  for (int i = 0; i < 18; ++i) cov(i, 0) = x[i];
  Dataset d = make_dataset(ModelKind::binomial, y, std::vector<double>(18, 45.0), cov);
  RunSettings settings;
  settings.model = ModelKind::binomial;
  RunResult fit = run_fit(d, settings);
  GenerativeSpec spec = resolve_generative_spec(fit, d, {}, {}, {}, 50, 2024);
  REQUIRE(spec.reg_coef.size() == 2);
  CoverageReport rep = run_coverage(d, settings, spec, fit.hyper.post_mode_alpha, 0);
  CHECK(rep.effective_nsim() >= 48);
  CHECK(rep.overall_rb > 0.9);
}
