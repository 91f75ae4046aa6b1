#pragma once

// One-call fitting pipeline: validation, the ADM fit, and (for the Binomial
// model with n_ar > 0) acceptance-rejection sampling layered on top. The
// effective per-group rows and hyper summary come from the A-R samples when
// they exist and from the ADM approximation otherwise.

#include <cstdint>
#include <optional>
#include <vector>

#include "gbp/adm.hpp"
#include "gbp/ar_sampler.hpp"
#include "gbp/model.hpp"

namespace gbp {

struct RunSettings {
  ModelKind model = ModelKind::gaussian;
  double confidence = 0.95;
  bool intercept = true;
  bool normal_ci = false;
  std::size_t n_ar = 0;
  std::size_t ar_factor = 4;
  double trial_scale = 1.3;
  HyperPriorFamily prior;
  std::uint64_t seed = 0;
  bool sort = true;

  void validate() const {
    prior.validate();
    if (!(confidence > 0.0) || !(confidence < 1.0))
      throw config_error("confidence level must be in (0,1)");
    if (!(trial_scale > 0.0)) throw config_error("trial-scale must be positive");
    if (n_ar > 0 && ar_factor == 0) throw config_error("ar-factor must be positive");
  }
};

struct RunResult {
  FitResult adm;
  std::optional<EnvelopeSpec> envelope;
  std::optional<PosteriorSample> samples;
  Vec beta_median;  // A-R only
  // effective summaries (sample-based when A-R ran)
  std::vector<GroupRow> rows;
  GroupRow mean_row;
  HyperSummary hyper;
  std::vector<std::size_t> display_order;
};

inline RunResult run_fit(const Dataset& d, const RunSettings& settings) {
  settings.validate();
  throw_if_invalid(d);
  RunResult out;
  FitOptions opts;
  opts.confidence = settings.confidence;
  opts.normal_ci = settings.normal_ci;
  opts.prior = settings.prior;
  out.adm = fit(d, opts);
  out.rows = out.adm.rows;
  out.mean_row = out.adm.mean_row;
  out.hyper = out.adm.hyper;
  out.display_order = out.adm.display_order;

  if (settings.n_ar > 0) {
    if (d.kind != ModelKind::binomial)
      throw config_error("n-ar applies to the binomial model only");
    HyperParams start{out.adm.alpha_fit.alpha_hat,
                      out.adm.profile ? out.adm.profile->beta_hat : Vec{}};
    out.envelope = build_envelope(d, settings.prior, settings.trial_scale, start);
    out.samples = ar_sample(d, *out.envelope, settings.n_ar, settings.ar_factor,
                            RngStream(settings.seed, 0), settings.prior);
    SampleSummary sum = summarize_samples(d, *out.samples, settings.confidence);
    out.rows = sum.rows;
    out.mean_row = sum.mean_row;
    out.hyper = sum.hyper;
    out.beta_median = sum.beta_median;
  }
  return out;
}

}  // namespace gbp
