#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "gbp/csv.hpp"
#include "gbp/report.hpp"
#include "gbp/svg.hpp"

using namespace gbp;
using Catch::Matchers::WithinAbs;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("./") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

RunResult fit_baseball() {
  std::vector<double> y = {18, 17, 16, 15, 14, 14, 13, 12, 11,
                           11, 10, 10, 10, 10, 10, 9, 8, 7};
  std::vector<double> x = {1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0};
  Mat cov(18, 1);
  for (int i = 0; i < 18; ++i) cov(i, 0) = x[i];
  Dataset d = make_dataset(ModelKind::binomial, y, std::vector<double>(18, 45.0), cov);
  RunSettings settings;
  settings.model = ModelKind::binomial;
  return run_fit(d, settings);
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("csv reading") {
  std::string path = write_temp("io_ok.csv",
                                "# comment line\n"
                                "y,n,outfielder\n"
                                "18,45,1\n"
                                "17, 45 ,0\n");
  CsvTable t = read_csv(path);
  REQUIRE(t.rows() == 2);
  CHECK(t.has("y"));
  CHECK(t.column("n")[1] == 45.0);
  CHECK(t.column("outfielder")[0] == 1.0);
  CHECK_THROWS_AS(t.column("missing"), io_error);
  std::remove(path.c_str());
}

TEST_CASE("csv errors carry line numbers") {
  std::string bad_count = write_temp("io_badcount.csv", "y,n\n1,2\n3\n");
  try {
    read_csv(bad_count);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  std::remove(bad_count.c_str());

  std::string bad_field = write_temp("io_badfield.csv", "y,n\n1,two\n");
  try {
    read_csv(bad_field);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    std::string msg = e.what();
    CHECK(msg.find(":2") != std::string::npos);
    CHECK(msg.find("two") != std::string::npos);
  }
  std::remove(bad_field.c_str());

  std::string empty = write_temp("io_empty.csv", "");
  CHECK_THROWS_AS(read_csv(empty), io_error);
  std::remove(empty.c_str());
}

TEST_CASE("report JSON is stable and complete") {
  RunResult fit = fit_baseball();
  RunSettings settings;
  settings.model = ModelKind::binomial;
  ReportInputs inputs{"data/baseball.csv", "", {"outfielder"}};
  Json a = report_to_json(fit, settings, inputs);
  Json b = report_to_json(fit, settings, inputs);
  CHECK(a.dump() == b.dump());  // byte-identical for identical inputs

  CHECK(a.at("schema_version") == "1");
  CHECK(a.at("model") == "binomial");
  CHECK(a.at("groups").size() == 18);
  CHECK(a.at("config").at("confidence") == 0.95);
  CHECK(a.at("config").at("ar_factor") == 4);
  CHECK(a.at("config").at("trial_scale") == 1.3);
  CHECK(a.at("config").at("t") == 0.0);
  CHECK(a.at("config").at("u") == 1.0);
  CHECK(a.contains("regression"));
  CHECK(a.at("hyper").contains("post_mode_r"));
  double shr = a.at("groups")[0].at("shrinkage").get<double>();
  CHECK_THAT(shr, WithinAbs(0.715, 0.002));
  // round trip through text preserves the numbers losslessly
  Json re = Json::parse(a.dump());
  CHECK(re.at("groups")[0].at("post_mean").get<double>() ==
        a.at("groups")[0].at("post_mean").get<double>());
}

TEST_CASE("coverage JSON carries the generative settings") {
  CoverageReport rep;
  rep.coverage_rb = {0.95, 0.96};
  rep.se_coverage_rb = {0.001, 0.002};
  rep.coverage_s = {0.94, 0.97};
  rep.se_coverage_s = {0.01, 0.02};
  rep.overall_rb = 0.955;
  rep.se_overall_rb = 0.0011;
  rep.spec.a_or_r = 683.5;
  rep.spec.prior_mean = {0.03, 0.03};
  rep.spec.nsim = 1000;
  rep.spec.seed = 7;
  rep.nsim_attempted = 1000;
  Json j = coverage_to_json(rep, ModelKind::poisson);
  CHECK(j.at("overall_coverage_rb") == 0.955);
  CHECK(j.at("generative_spec").at("a_or_r") == 683.5);
  CHECK(j.at("coverage_rb").size() == 2);
}

TEST_CASE("display formatting") {
  CHECK(format_value(0.91123) == "0.911");
  CHECK(format_value(683.53) == "684");
  CHECK(format_value(0.0312879) == "0.0313");
  CHECK(format_value(0.0065339) == "0.00653");
  CHECK(format_value(-1.19384, 4) == "-1.194");
  CHECK(format_value(0.0) == "0");
  CHECK(format_pvalue(0.15414) == "0.154");
  CHECK(format_pvalue(1e-20) == "0.000");
}

TEST_CASE("fit table text") {
  RunResult fit = fit_baseball();
  std::string table = format_fit_table(fit, true);
  CHECK(table.find("obs.mean") != std::string::npos);
  CHECK(table.find("shrinkage") != std::string::npos);
  CHECK(table.find("0.715") != std::string::npos);
  CHECK(table.find("Mean") != std::string::npos);
  CHECK(count_occurrences(table, "\n") >= 20);  // header + 18 rows + mean

  std::string hyper = format_hyper_summary(fit);
  CHECK(hyper.find("post.mode.alpha") != std::string::npos);
  CHECK(hyper.find("-4.73") != std::string::npos);

  std::string reg = format_regression_summary(fit);
  CHECK(reg.find("beta1") != std::string::npos);
  CHECK(reg.find("-1.194") != std::string::npos);
  CHECK(reg.find("0.038") != std::string::npos);
}

TEST_CASE("svg plots have the documented structure") {
  RunResult fit = fit_baseball();
  std::string shrink = shrinkage_plot_svg(fit.rows);
  // two prior-mean markers for the two covariate classes
  CHECK(count_occurrences(shrink, "prior-marker") == 2);
  CHECK(count_occurrences(shrink, "class=\"obs\"") == 18);
  CHECK(count_occurrences(shrink, "class=\"post\"") == 18);
  CHECK(shrink.find("<svg") != std::string::npos);
  CHECK(shrink.rfind("</svg>\n") == shrink.size() - 7);

  std::string interval = interval_plot_svg(fit.rows, fit.display_order, true);
  CHECK(count_occurrences(interval, "class=\"interval\"") == 18);
  CHECK(count_occurrences(interval, "class=\"obs\"") == 18);
  CHECK(count_occurrences(interval, "prior-line") == 2);

  CoverageReport rep;
  rep.coverage_rb = {0.95, 0.96, 0.97};
  rep.se_coverage_rb = {0.001, 0.002, 0.001};
  rep.coverage_s = {0.94, 0.97, 0.96};
  rep.se_coverage_s = {0.01, 0.02, 0.01};
  rep.spec.confidence = 0.95;
  std::string cov = coverage_plot_svg(rep);
  // the nominal-level horizontal rule and one whisker + dot per group
  CHECK(count_occurrences(cov, "class=\"nominal\"") == 1);
  CHECK(count_occurrences(cov, "class=\"rb\"") == 3);
  CHECK(count_occurrences(cov, "class=\"whisker\"") == 3);

  // well-formedness: every opened tag is closed or self-closing
  for (const std::string* doc : {&shrink, &interval, &cov}) {
    CHECK(count_occurrences(*doc, "<line") == count_occurrences(*doc, "\"/>") -
              count_occurrences(*doc, "<circle") - count_occurrences(*doc, "<rect"));
    CHECK(count_occurrences(*doc, "<text") == count_occurrences(*doc, "</text>"));
  }
}

TEST_CASE("svg output is identical across runs") {
  RunResult fit = fit_baseball();
  CHECK(shrinkage_plot_svg(fit.rows) == shrinkage_plot_svg(fit.rows));
  CHECK(interval_plot_svg(fit.rows, fit.display_order, true) ==
        interval_plot_svg(fit.rows, fit.display_order, true));
}
