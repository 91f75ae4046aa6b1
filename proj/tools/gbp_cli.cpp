// gbp: fit two-level conjugate hierarchical models (gaussian / poisson /
// binomial) to group-level aggregate data, check interval coverage by
// parametric bootstrap, and emit SVG diagnostics.
//
// Exit codes: 0 success, 2 validation/config, 3 numeric or fit failure,
// 4 I/O or parse failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbp/gbp.hpp"

namespace {

struct FitArgs {
  std::string model;
  std::string data_path;
  std::string out_path;
  std::string prior_mean;  // literal value or @column
  std::vector<std::string> covariates;
  bool no_intercept = false;
  bool sort_off = false;
  gbp::RunSettings settings;
};

gbp::ModelKind parse_model(const std::string& name) {
  if (name == "gaussian") return gbp::ModelKind::gaussian;
  if (name == "poisson") return gbp::ModelKind::poisson;
  if (name == "binomial") return gbp::ModelKind::binomial;
  throw gbp::config_error("unknown model '" + name + "'");
}

gbp::Dataset load_dataset(const std::string& path, gbp::ModelKind kind,
                          const std::string& prior_mean_spec,
                          const std::vector<std::string>& covariates,
                          bool intercept) {
  gbp::CsvTable csv = gbp::read_csv(path);
  if (!csv.has("y")) throw gbp::io_error(path + ": missing required column 'y'");
  const char* second = kind == gbp::ModelKind::gaussian ? "se" : "n";
  if (!csv.has(second))
    throw gbp::io_error(path + ": missing required column '" + second + "'");
  std::vector<double> y = csv.column("y");
  std::vector<double> se_or_n = csv.column(second);

  std::vector<double> prior;
  if (!prior_mean_spec.empty()) {
    if (prior_mean_spec[0] == '@') {
      prior = csv.column(prior_mean_spec.substr(1));
    } else {
      char* end = nullptr;
      double v = std::strtod(prior_mean_spec.c_str(), &end);
      if (end == prior_mean_spec.c_str() || *end != '\0')
        throw gbp::config_error("--prior-mean must be a number or @column");
      prior.assign(y.size(), v);
    }
  } else if (csv.has("prior_mean")) {
    prior = csv.column("prior_mean");
  }

  gbp::Mat X;
  if (prior.empty()) {
    X = gbp::Mat(y.size(), covariates.size());
    for (std::size_t c = 0; c < covariates.size(); ++c) {
      const gbp::Vec& col = csv.column(covariates[c]);
      for (std::size_t i = 0; i < y.size(); ++i) X(i, c) = col[i];
    }
  } else if (!covariates.empty()) {
    throw gbp::config_error("--covariates cannot be combined with a known prior mean");
  }
  return gbp::make_dataset(kind, std::move(y), std::move(se_or_n), X,
                           std::move(prior), intercept);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gbp::io_error("cannot write '" + path + "'");
  out << content;
}

gbp::Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gbp::io_error("cannot open '" + path + "'");
  gbp::Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw gbp::io_error(path + ": " + e.what());
  }
  return j;
}

gbp::RunSettings settings_from_report(const gbp::Json& rep) {
  gbp::RunSettings s;
  s.model = parse_model(rep.at("model").get<std::string>());
  const gbp::Json& cfg = rep.at("config");
  s.confidence = cfg.at("confidence").get<double>();
  s.intercept = cfg.at("intercept").get<bool>();
  s.normal_ci = cfg.at("normal_ci").get<bool>();
  s.n_ar = cfg.at("n_ar").get<std::size_t>();
  s.ar_factor = cfg.at("ar_factor").get<std::size_t>();
  s.trial_scale = cfg.at("trial_scale").get<double>();
  s.prior.t = cfg.at("t").get<double>();
  s.prior.u = cfg.at("u").get<double>();
  s.seed = cfg.at("seed").get<std::uint64_t>();
  s.sort = cfg.at("sort").get<bool>();
  return s;
}

std::vector<gbp::GroupRow> rows_from_report(const gbp::Json& rep) {
  std::vector<gbp::GroupRow> rows;
  for (const gbp::Json& g : rep.at("groups")) {
    gbp::GroupRow r;
    r.obs_mean = g.at("obs_mean").get<double>();
    r.n_or_se = g.at("n_or_se").get<double>();
    if (g.contains("covariates")) r.covariates = g.at("covariates").get<gbp::Vec>();
    r.prior_mean = g.at("prior_mean").get<double>();
    r.shrinkage = g.at("shrinkage").get<double>();
    r.low = g.at("low_intv").get<double>();
    r.post_mean = g.at("post_mean").get<double>();
    r.upp = g.at("upp_intv").get<double>();
    r.post_sd = g.at("post_sd").get<double>();
    rows.push_back(r);
  }
  return rows;
}

int run_fit_command(const FitArgs& args) {
  gbp::RunSettings settings = args.settings;
  settings.model = parse_model(args.model);
  settings.intercept = !args.no_intercept;
  settings.sort = !args.sort_off;
  gbp::Dataset d = load_dataset(args.data_path, settings.model, args.prior_mean,
                                args.covariates, settings.intercept);
  auto t0 = std::chrono::steady_clock::now();
  gbp::RunResult fit = gbp::run_fit(d, settings);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout << gbp::format_fit_table(fit, settings.sort) << "\n";
  std::cout << gbp::format_hyper_summary(fit) << "\n";
  std::string reg = gbp::format_regression_summary(fit);
  if (!reg.empty()) std::cout << reg << "\n";
  for (const std::string& w : fit.adm.warnings)
    std::cerr << "warning: " << w << "\n";
  std::cerr << "fit completed in " << gbp::format_value(secs) << " s\n";

  if (!args.out_path.empty()) {
    gbp::ReportInputs inputs{args.data_path, args.prior_mean, args.covariates};
    write_file(args.out_path,
               gbp::report_to_json(fit, settings, inputs).dump(2) + "\n");
  }
  return 0;
}

struct CoverageArgs {
  std::string fit_path, data_path, out_path;
  std::size_t nsim = 1000;
  std::optional<double> a_or_r;
  std::vector<double> reg_coef;
  std::string prior_mean;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
};

int run_coverage_command(const CoverageArgs& args) {
  gbp::Json rep = read_json(args.fit_path);
  gbp::RunSettings settings = settings_from_report(rep);
  std::string prior_spec;
  std::vector<std::string> cov_cols;
  const gbp::Json& prov = rep.at("provenance");
  if (prov.contains("prior_mean_spec"))
    prior_spec = prov.at("prior_mean_spec").get<std::string>();
  if (prov.contains("covariate_columns"))
    cov_cols = prov.at("covariate_columns").get<std::vector<std::string>>();
  gbp::Dataset d = load_dataset(args.data_path, settings.model, prior_spec, cov_cols,
                                settings.intercept);

  // generative defaults come from the fitted hyper summary in the report
  gbp::GenerativeSpec spec;
  spec.nsim = args.nsim;
  spec.confidence = settings.confidence;
  spec.seed = args.seed_given ? args.seed : settings.seed;
  const gbp::Json& hyper = rep.at("hyper");
  spec.a_or_r = args.a_or_r ? *args.a_or_r
                            : hyper.contains("post_mode_r")
                                  ? hyper.at("post_mode_r").get<double>()
                                  : hyper.at("post_mode_A").get<double>();
  if (!args.reg_coef.empty()) {
    spec.reg_coef = args.reg_coef;
  } else if (!args.prior_mean.empty()) {
    char* end = nullptr;
    double v = std::strtod(args.prior_mean.c_str(), &end);
    if (end == args.prior_mean.c_str() || *end != '\0')
      throw gbp::config_error("--prior-mean must be numeric");
    spec.prior_mean.assign(d.k(), v);
  } else if (d.prior_known()) {
    spec.prior_mean = d.prior_mean;
  } else if (rep.contains("ar")) {
    spec.reg_coef = rep.at("ar").at("beta_median").get<gbp::Vec>();
  } else if (rep.contains("regression")) {
    spec.reg_coef = rep.at("regression").at("estimate").get<gbp::Vec>();
  }
  spec.validate(d);

  double bracket_center = hyper.at("post_mode_alpha").get<double>();
  auto t0 = std::chrono::steady_clock::now();
  gbp::CoverageReport cov =
      gbp::run_coverage(d, settings, spec, bracket_center, args.threads);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout << gbp::format_coverage_summary(cov);
  std::cerr << "coverage completed in " << gbp::format_value(secs) << " s\n";
  if (!args.out_path.empty())
    write_file(args.out_path,
               gbp::coverage_to_json(cov, settings.model).dump(2) + "\n");
  return 0;
}

struct PlotArgs {
  std::string fit_path, coverage_path, out_path;
  std::string kind;
  std::string sort = "on";
};

int run_plot_command(const PlotArgs& args) {
  if (args.kind == "coverage") {
    if (args.coverage_path.empty())
      throw gbp::config_error("--kind coverage needs --coverage PATH");
    gbp::Json cj = read_json(args.coverage_path);
    gbp::CoverageReport rep;
    rep.coverage_rb = cj.at("coverage_rb").get<gbp::Vec>();
    rep.se_coverage_rb = cj.at("se_coverage_rb").get<gbp::Vec>();
    rep.coverage_s = cj.at("coverage_s").get<gbp::Vec>();
    rep.se_coverage_s = cj.at("se_coverage_s").get<gbp::Vec>();
    rep.overall_rb = cj.at("overall_coverage_rb").get<double>();
    rep.spec.confidence = cj.at("generative_spec").at("confidence").get<double>();
    write_file(args.out_path, gbp::coverage_plot_svg(rep));
    return 0;
  }
  if (!args.coverage_path.empty())
    throw gbp::config_error("--coverage only applies to --kind coverage");
  if (args.fit_path.empty())
    throw gbp::config_error("--kind " + args.kind + " needs --fit PATH");
  if (args.sort != "on" && args.sort != "off")
    throw gbp::config_error("--sort must be 'on' or 'off'");
  gbp::Json rep = read_json(args.fit_path);
  std::vector<gbp::GroupRow> rows = rows_from_report(rep);
  std::vector<std::size_t> order =
      rep.at("display_order").get<std::vector<std::size_t>>();
  bool sorted = args.sort == "on";
  if (args.kind == "shrinkage") {
    write_file(args.out_path, gbp::shrinkage_plot_svg(rows));
  } else if (args.kind == "interval") {
    write_file(args.out_path, gbp::interval_plot_svg(rows, order, sorted));
  } else {
    throw gbp::config_error("unknown plot kind '" + args.kind + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-level conjugate hierarchical model fitting and checking"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
  fit_cmd->add_option("--model", fit_args.model, "gaussian | binomial | poisson")
      ->required();
  fit_cmd->add_option("--data", fit_args.data_path, "CSV file")->required();
  fit_cmd->add_option("--confidence", fit_args.settings.confidence,
                      "confidence level (default 0.95)");
  fit_cmd->add_option("--prior-mean", fit_args.prior_mean,
                      "known expected random effect: value or @column");
  fit_cmd->add_option("--covariates", fit_args.covariates,
                      "covariate column names")->delimiter(',');
  fit_cmd->add_flag("--no-intercept", fit_args.no_intercept,
                    "do not prepend an intercept column");
  fit_cmd->add_flag("--normal-ci", fit_args.settings.normal_ci,
                    "gaussian: Normal instead of skewed-Normal intervals");
  fit_cmd->add_option("--n-ar", fit_args.settings.n_ar,
                      "binomial: posterior sample size for acceptance-rejection");
  fit_cmd->add_option("--ar-factor", fit_args.settings.ar_factor,
                      "trial draws per requested sample (default 4)");
  fit_cmd->add_option("--trial-scale", fit_args.settings.trial_scale,
                      "envelope scale tuning (default 1.3)");
  fit_cmd->add_option("--t", fit_args.settings.prior.t, "hyper-prior t (default 0)");
  fit_cmd->add_option("--u", fit_args.settings.prior.u, "hyper-prior u (default 1)");
  fit_cmd->add_option("--seed", fit_args.settings.seed, "random seed");
  fit_cmd->add_flag("--no-sort", fit_args.sort_off, "print rows in input order");
  fit_cmd->add_option("--out", fit_args.out_path, "write the JSON report here");

  CoverageArgs cov_args;
  double a_or_r_opt = 0.0;
  CLI::App* cov_cmd = app.add_subcommand("coverage", "frequency method checking");
  cov_cmd->add_option("--fit", cov_args.fit_path, "fit report JSON")->required();
  cov_cmd->add_option("--data", cov_args.data_path, "original CSV data")->required();
  cov_cmd->add_option("--nsim", cov_args.nsim, "number of simulations");
  CLI::Option* aor = cov_cmd->add_option("--A-or-r", a_or_r_opt,
                                         "generative A or r (default: fitted mode)");
  cov_cmd->add_option("--reg-coef", cov_args.reg_coef,
                      "generative regression coefficients")->delimiter(',');
  cov_cmd->add_option("--prior-mean", cov_args.prior_mean,
                      "generative expected random effect");
  CLI::Option* seed_opt = cov_cmd->add_option("--seed", cov_args.seed, "random seed");
  cov_cmd->add_option("--threads", cov_args.threads,
                      "worker pool size (default: GBP_THREADS or hardware)");
  cov_cmd->add_option("--out", cov_args.out_path, "write the coverage JSON here");

  PlotArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot", "emit an SVG diagnostic plot");
  plot_cmd->add_option("--fit", plot_args.fit_path, "fit report JSON");
  plot_cmd->add_option("--coverage", plot_args.coverage_path, "coverage JSON");
  plot_cmd->add_option("--kind", plot_args.kind, "shrinkage | interval | coverage")
      ->required();
  plot_cmd->add_option("--out", plot_args.out_path, "output SVG path")->required();
  plot_cmd->add_option("--sort", plot_args.sort, "on | off (default on)");

  try {
    app.parse(argc, argv);
    if (fit_cmd->parsed()) return run_fit_command(fit_args);
    if (cov_cmd->parsed()) {
      if (*aor) cov_args.a_or_r = a_or_r_opt;
      cov_args.seed_given = static_cast<bool>(*seed_opt);
      return run_coverage_command(cov_args);
    }
    if (plot_cmd->parsed()) return run_plot_command(plot_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gbp::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const gbp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gbp::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
