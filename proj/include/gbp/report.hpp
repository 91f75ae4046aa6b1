#pragma once

// Report documents: JSON serialization (schema_version "1") and the printed
// summary tables. JSON keeps full precision; tables round for reading.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbp/fit.hpp"
#include "gbp/method_check.hpp"

namespace gbp {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// display formatting: 3 significant digits, one extra for small magnitudes
// (matching the summary-table style), full precision in JSON only.

inline std::string format_value(double v, int sig = 3) {
  if (v == 0.0) return "0";
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  // fixed notation with `sig` significant digits, keeping trailing zeros
  int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v)))) + 1;
  int decimals = sig - magnitude;
  if (decimals < 0) decimals = 0;
  if (decimals > 12) decimals = 12;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// data columns (trial counts, exposures): integers print as integers
inline std::string format_data_value(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  return format_value(v, 4);
}

inline std::string format_pvalue(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", p);
  return buf;
}

namespace detail {
inline Json row_to_json(const GroupRow& r) {
  Json j;
  j["obs_mean"] = r.obs_mean;
  j["n_or_se"] = r.n_or_se;
  if (!r.covariates.empty()) j["covariates"] = r.covariates;
  j["prior_mean"] = r.prior_mean;
  j["shrinkage"] = r.shrinkage;
  j["low_intv"] = r.low;
  j["post_mean"] = r.post_mean;
  j["upp_intv"] = r.upp;
  j["post_sd"] = r.post_sd;
  return j;
}
}  // namespace detail

struct ReportInputs {
  std::string data_path;
  std::string prior_mean_spec;  // literal value or "@column"; empty if none
  std::vector<std::string> covariate_columns;
};

inline Json report_to_json(const RunResult& fit, const RunSettings& settings,
                           const ReportInputs& inputs) {
  Json j;
  j["schema_version"] = "1";
  j["model"] = to_string(fit.adm.data.kind);
  Json cfg;
  cfg["confidence"] = settings.confidence;
  cfg["intercept"] = settings.intercept;
  cfg["normal_ci"] = settings.normal_ci;
  cfg["n_ar"] = settings.n_ar;
  cfg["ar_factor"] = settings.ar_factor;
  cfg["trial_scale"] = settings.trial_scale;
  cfg["t"] = settings.prior.t;
  cfg["u"] = settings.prior.u;
  cfg["seed"] = settings.seed;
  cfg["sort"] = settings.sort;
  j["config"] = cfg;

  Json groups = Json::array();
  for (const GroupRow& r : fit.rows) groups.push_back(detail::row_to_json(r));
  j["groups"] = groups;
  j["mean_row"] = detail::row_to_json(fit.mean_row);
  j["display_order"] = fit.display_order;

  Json hyper;
  hyper["post_mode_alpha"] = fit.hyper.post_mode_alpha;
  hyper["post_sd_alpha"] = fit.hyper.post_sd_alpha;
  hyper[fit.adm.data.kind == ModelKind::gaussian ? "post_mode_A" : "post_mode_r"] =
      fit.hyper.post_mode_a_or_r;
  j["hyper"] = hyper;

  if (fit.adm.regression.present()) {
    Json reg;
    reg["estimate"] = fit.adm.regression.estimate;
    reg["se"] = fit.adm.regression.se;
    reg["z_val"] = fit.adm.regression.z;
    reg["p_val"] = fit.adm.regression.p;
    j["regression"] = reg;
  }
  if (fit.adm.data.prior_known()) j["prior_mean"] = fit.adm.data.prior_mean;
  if (fit.samples) {
    Json ar;
    ar["n_accepted"] = fit.samples->alpha_draws.size();
    ar["n_trials"] = fit.samples->weights.size();
    ar["acceptance_rate"] = fit.samples->acceptance_rate;
    ar["refill_rounds"] = fit.samples->refill_rounds;
    ar["alpha_median"] = fit.hyper.post_mode_alpha;
    ar["beta_median"] = fit.beta_median;
    j["ar"] = ar;
  }
  if (!fit.adm.warnings.empty()) j["warnings"] = fit.adm.warnings;

  Json prov;
  prov["data_path"] = inputs.data_path;
  if (!inputs.prior_mean_spec.empty()) prov["prior_mean_spec"] = inputs.prior_mean_spec;
  if (!inputs.covariate_columns.empty())
    prov["covariate_columns"] = inputs.covariate_columns;
  prov["seed"] = settings.seed;
  prov["k"] = fit.adm.data.k();
  j["provenance"] = prov;
  return j;
}

inline Json coverage_to_json(const CoverageReport& rep, ModelKind kind) {
  Json j;
  j["schema_version"] = "1";
  j["model"] = to_string(kind);
  Json spec;
  spec["a_or_r"] = rep.spec.a_or_r;
  if (!rep.spec.reg_coef.empty()) spec["reg_coef"] = rep.spec.reg_coef;
  if (!rep.spec.prior_mean.empty()) spec["prior_mean"] = rep.spec.prior_mean;
  spec["nsim"] = rep.spec.nsim;
  spec["confidence"] = rep.spec.confidence;
  spec["seed"] = rep.spec.seed;
  j["generative_spec"] = spec;
  j["coverage_rb"] = rep.coverage_rb;
  j["se_coverage_rb"] = rep.se_coverage_rb;
  j["coverage_s"] = rep.coverage_s;
  j["se_coverage_s"] = rep.se_coverage_s;
  j["overall_coverage_rb"] = rep.overall_rb;
  j["se_overall_coverage_rb"] = rep.se_overall_rb;
  j["nsim_attempted"] = rep.nsim_attempted;
  j["nsim_failed"] = rep.nsim_failed;
  return j;
}

// ---------------------------------------------------------------------------
// printed tables, one row per group in display order plus the means row

namespace detail {
inline void pad(std::string& s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
}
}  // namespace detail

inline std::string format_fit_table(const RunResult& fit, bool sorted) {
  const Dataset& d = fit.adm.data;
  const bool gaussian = d.kind == ModelKind::gaussian;
  const std::size_t ncov = fit.rows.empty() ? 0 : fit.rows[0].covariates.size();
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head = {"", "obs.mean", gaussian ? "se" : "n"};
  for (std::size_t c = 0; c < ncov; ++c) head.push_back("X" + std::to_string(c + 1));
  for (const char* h : {"prior.mean", "shrinkage", "low.intv", "post.mean",
                        "upp.intv", "post.sd"})
    head.push_back(h);
  cells.push_back(head);

  std::vector<std::size_t> order(fit.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (sorted) order = fit.display_order;
  auto push_row = [&](const std::string& label, const GroupRow& r, bool mean_row) {
    std::vector<std::string> row;
    row.push_back(label);
    row.push_back(mean_row ? "" : format_value(r.obs_mean));
    row.push_back(format_data_value(r.n_or_se));
    for (double c : r.covariates) row.push_back(format_value(c));
    row.push_back(format_value(r.prior_mean));
    row.push_back(format_value(r.shrinkage));
    row.push_back(format_value(r.low));
    row.push_back(format_value(r.post_mean));
    row.push_back(format_value(r.upp));
    row.push_back(format_value(r.post_sd));
    cells.push_back(row);
  };
  for (std::size_t i : order)
    push_row(std::to_string(i + 1), fit.rows[i], false);
  push_row("Mean", fit.mean_row, true);

  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::string out = gaussian
      ? "Summary for each group (sorted by the descending order of se):\n\n"
      : "Summary for each unit (sorted by n):\n\n";
  if (!sorted) out = "Summary for each unit (input order):\n\n";
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      detail::pad(cell, widths[c]);
      line += cell;
      if (c + 1 < row.size()) line += "  ";
    }
    out += line + "\n";
  }
  return out;
}

inline std::string format_hyper_summary(const RunResult& fit) {
  const bool gaussian = fit.adm.data.kind == ModelKind::gaussian;
  std::string out =
      "Second-level Variance Component Estimation Summary:\n"
      "alpha=log(A) for Gaussian or alpha=log(1/r) for Binomial and Poisson data:\n\n";
  out += "post.mode.alpha post.sd.alpha post.mode.";
  out += gaussian ? "A" : "r";
  out += "\n";
  std::string a = format_value(fit.hyper.post_mode_alpha);
  std::string s = format_value(fit.hyper.post_sd_alpha);
  std::string r = format_value(fit.hyper.post_mode_a_or_r);
  detail::pad(a, 15);
  detail::pad(s, 14);
  detail::pad(r, 12);
  out += a + " " + s + " " + r + "\n";
  return out;
}

inline std::string format_regression_summary(const RunResult& fit) {
  if (!fit.adm.regression.present()) return "";
  std::string out = "Regression Summary:\n\n";
  out += "      estimate     se  z.val p.val\n";
  for (std::size_t c = 0; c < fit.adm.regression.estimate.size(); ++c) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "beta%zu %8.3f %6.3f %6.3f %.3f\n", c + 1,
                  fit.adm.regression.estimate[c], fit.adm.regression.se[c],
                  fit.adm.regression.z[c], fit.adm.regression.p[c]);
    out += buf;
  }
  return out;
}

inline std::string format_coverage_summary(const CoverageReport& rep) {
  std::string out = "Frequency method checking (" +
                    std::to_string(rep.effective_nsim()) + " simulations):\n\n";
  out += " group  coverageRB  se.coverageRB  coverageS  se.coverageS\n";
  for (std::size_t j = 0; j < rep.coverage_rb.size(); ++j) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%6zu  %10.3f  %13.4f  %9.3f  %12.4f\n", j + 1,
                  rep.coverage_rb[j], rep.se_coverage_rb[j], rep.coverage_s[j],
                  rep.se_coverage_s[j]);
    out += buf;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "\noverall.coverageRB %.3f (se %.4f)\n", rep.overall_rb,
                rep.se_overall_rb);
  out += buf;
  if (rep.nsim_failed > 0)
    out += "excluded failed refits: " + std::to_string(rep.nsim_failed) + "\n";
  return out;
}

}  // namespace gbp
