#pragma once

// Standalone SVG emission for the three diagnostic plots:
//   shrinkage: observed means on a top rail shrinking to posterior means on a
//              bottom rail, with vertical markers at the prior mean(s)
//   interval:  per-group vertical interval segments with observed (hollow)
//              and posterior-mean (filled) markers plus prior-mean rule(s)
//   coverage:  per-group RB estimates with +-1 se whiskers and the nominal
//              confidence level as a horizontal rule

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gbp/adm.hpp"
#include "gbp/method_check.hpp"

namespace gbp {

namespace svg_detail {

constexpr double width = 640, height = 440;
constexpr double mleft = 64, mright = 24, mtop = 36, mbottom = 44;

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Builder {
  std::string body;

  void line(double x1, double y1, double x2, double y2, const std::string& cls,
            const std::string& stroke, double w = 1.0) {
    body += "<line class=\"" + cls + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
            "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke +
            "\" stroke-width=\"" + num(w) + "\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& cls,
              const std::string& fill, const std::string& stroke) {
    body += "<circle class=\"" + cls + "\" cx=\"" + num(cx) + "\" cy=\"" + num(cy) +
            "\" r=\"" + num(r) + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
            "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle") {
    body += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
            "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
            "\">" + s + "</text>\n";
  }
  std::string finish(const std::string& title) const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
           num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width / 2) +
           "\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">" + title + "</text>\n";
    return out + body + "</svg>\n";
  }
};

struct Scale {
  double lo, hi, out_lo, out_hi;
  double operator()(double v) const {
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

inline Scale value_scale(double lo, double hi, double out_lo, double out_hi) {
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  double padding = 0.06 * (hi - lo);
  return {lo - padding, hi + padding, out_lo, out_hi};
}

}  // namespace svg_detail

inline std::string shrinkage_plot_svg(const std::vector<GroupRow>& rows) {
  using namespace svg_detail;
  double lo = rows[0].obs_mean, hi = rows[0].obs_mean;
  std::set<double> priors;
  for (const GroupRow& r : rows) {
    lo = std::min({lo, r.obs_mean, r.post_mean, r.prior_mean});
    hi = std::max({hi, r.obs_mean, r.post_mean, r.prior_mean});
    priors.insert(r.prior_mean);
  }
  Scale sx = value_scale(lo, hi, mleft, width - mright);
  const double y_obs = mtop + 60, y_post = height - mbottom - 60;
  Builder b;
  b.line(mleft, y_obs, width - mright, y_obs, "rail", "black");
  b.line(mleft, y_post, width - mright, y_post, "rail", "black");
  b.text(mleft - 8, y_obs + 4, "observed", "end");
  b.text(mleft - 8, y_post + 4, "posterior", "end");
  for (double p : priors)
    b.line(sx(p), y_obs - 16, sx(p), y_post + 16, "prior-marker", "blue", 1.5);
  for (const GroupRow& r : rows) {
    b.line(sx(r.obs_mean), y_obs, sx(r.post_mean), y_post, "link", "gray", 0.7);
    b.circle(sx(r.obs_mean), y_obs, 3.2, "obs", "none", "black");
    b.circle(sx(r.post_mean), y_post, 3.2, "post", "red", "red");
  }
  return b.finish("Shrinkage plot");
}

inline std::string interval_plot_svg(const std::vector<GroupRow>& rows,
                                     const std::vector<std::size_t>& display_order,
                                     bool sorted) {
  using namespace svg_detail;
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (sorted) order = display_order;
  double lo = rows[0].low, hi = rows[0].upp;
  std::set<double> priors;
  for (const GroupRow& r : rows) {
    lo = std::min({lo, r.low, r.obs_mean});
    hi = std::max({hi, r.upp, r.obs_mean});
    priors.insert(r.prior_mean);
  }
  Scale sy = value_scale(lo, hi, height - mbottom, mtop + 12);
  const double gap = (width - mleft - mright) / static_cast<double>(order.size() + 1);
  Builder b;
  b.line(mleft, height - mbottom, width - mright, height - mbottom, "axis", "black");
  for (double p : priors)
    b.line(mleft, sy(p), width - mright, sy(p), "prior-line", "blue", 1.2);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const GroupRow& r = rows[order[pos]];
    double x = mleft + gap * static_cast<double>(pos + 1);
    b.line(x, sy(r.low), x, sy(r.upp), "interval", "black", 1.2);
    b.circle(x, sy(r.obs_mean), 3.0, "obs", "none", "black");
    b.circle(x, sy(r.post_mean), 3.0, "post", "red", "red");
    if (order.size() <= 40)
      b.text(x, height - mbottom + 14, std::to_string(order[pos] + 1));
  }
  return b.finish("Interval plot");
}

inline std::string coverage_plot_svg(const CoverageReport& rep) {
  using namespace svg_detail;
  const std::size_t k = rep.coverage_rb.size();
  double lo = rep.spec.confidence, hi = rep.spec.confidence;
  for (std::size_t j = 0; j < k; ++j) {
    lo = std::min(lo, rep.coverage_rb[j] - rep.se_coverage_rb[j]);
    hi = std::max(hi, rep.coverage_rb[j] + rep.se_coverage_rb[j]);
  }
  Scale sy = value_scale(lo, hi, height - mbottom, mtop + 12);
  const double gap = (width - mleft - mright) / static_cast<double>(k + 1);
  Builder b;
  b.line(mleft, height - mbottom, width - mright, height - mbottom, "axis", "black");
  b.line(mleft, sy(rep.spec.confidence), width - mright, sy(rep.spec.confidence),
         "nominal", "black", 1.5);
  b.text(mleft - 8, sy(rep.spec.confidence) + 4, svg_detail::num(rep.spec.confidence), "end");
  for (std::size_t j = 0; j < k; ++j) {
    double x = mleft + gap * static_cast<double>(j + 1);
    b.line(x, sy(rep.coverage_rb[j] - rep.se_coverage_rb[j]),
           x, sy(rep.coverage_rb[j] + rep.se_coverage_rb[j]), "whisker", "gray", 1.0);
    b.circle(x, sy(rep.coverage_rb[j]), 3.0, "rb", "red", "red");
    if (k <= 40) b.text(x, height - mbottom + 14, std::to_string(j + 1));
  }
  return b.finish("Coverage plot");
}

}  // namespace gbp
