#include "ldu/svg_chart.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace ldu {
namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 730, kTop = 50, kBottom = 430;

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Scale {
  double lo, hi;
  double x(double v) const { return kLeft + (v - lo) / (hi - lo) * (kRight - kLeft); }
  static double y(double v) { return kBottom - std::clamp(v, 0.0, 1.0) * (kBottom - kTop); }
};

// One <polyline> per run of defined values.
std::string series(const std::vector<std::pair<double, std::optional<double>>>& pts,
                   const Scale& scale, const std::string& style) {
  std::string out, run;
  std::size_t count = 0;
  auto flush = [&] {
    if (count > 0) {
      out += "<polyline fill=\"none\" " + style + " points=\"" + run + "\"/>\n";
    }
    run.clear();
    count = 0;
  };
  for (const auto& [x, y] : pts) {
    if (!y) {
      flush();
      continue;
    }
    run += fmt("%.2f", scale.x(x)) + "," + fmt("%.2f", Scale::y(*y)) + " ";
    ++count;
  }
  flush();
  return out;
}

}  // namespace

std::string render_curve_svg(std::span<const MetricsRow> rows, const std::string& title,
                             const std::string& param_label,
                             std::optional<double> baseline_f1) {
  std::vector<MetricsRow> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricsRow& a, const MetricsRow& b) { return a.param < b.param; });
  Scale scale{0.0, 1.0};
  if (!sorted.empty()) {
    scale = {sorted.front().param, sorted.back().param};
    if (scale.hi <= scale.lo) {
      scale.lo -= 0.5;
      scale.hi += 0.5;
    }
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
                    "viewBox=\"0 0 800 500\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"" + fmt("%.0f", kWidth) + "\" height=\"" + fmt("%.0f", kHeight) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(title) + "</text>\n";

  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    const double y = Scale::y(v);
    svg += "<line x1=\"70\" x2=\"730\" y1=\"" + fmt("%.2f", y) + "\" y2=\"" + fmt("%.2f", y) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"62\" y=\"" + fmt("%.2f", y + 4) + "\" text-anchor=\"end\">" +
           fmt("%.1f", v) + "</text>\n";
    svg += "<text x=\"738\" y=\"" + fmt("%.2f", y + 4) + "\" fill=\"blue\">" +
           fmt("%.0f%%", v * 100) + "</text>\n";
    const double xv = scale.lo + (scale.hi - scale.lo) * v;
    svg += "<text x=\"" + fmt("%.2f", scale.x(xv)) + "\" y=\"448\" text-anchor=\"middle\">" +
           fmt("%.3g", xv) + "</text>\n";
  }
  svg += "<rect x=\"70\" y=\"50\" width=\"660\" height=\"380\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"400\" y=\"475\" text-anchor=\"middle\">" + escape(param_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"240\" text-anchor=\"middle\" transform=\"rotate(-90 20 240)\">F1"
         "</text>\n";
  svg += "<text x=\"785\" y=\"240\" text-anchor=\"middle\" fill=\"blue\" "
         "transform=\"rotate(90 785 240)\">Defer rate</text>\n";

  if (baseline_f1) {
    const double y = Scale::y(*baseline_f1);
    svg += "<line x1=\"70\" x2=\"730\" y1=\"" + fmt("%.2f", y) + "\" y2=\"" + fmt("%.2f", y) +
           "\" stroke=\"red\" stroke-dasharray=\"2,4\"/>\n";
  }

  std::vector<std::pair<double, std::optional<double>>> f1, overall, defer;
  for (const auto& r : sorted) {
    f1.emplace_back(r.param, r.f1);
    overall.emplace_back(r.param, r.f1_overall);
    defer.emplace_back(r.param, r.defer_rate);
  }
  svg += series(f1, scale, "stroke=\"red\" stroke-width=\"2\"");
  svg += series(overall, scale, "stroke=\"red\" stroke-width=\"2\" stroke-dasharray=\"8,4\"");
  svg += series(defer, scale, "stroke=\"blue\" stroke-width=\"2\"");

  svg += "<g font-size=\"11\">\n"
         "<line x1=\"90\" x2=\"120\" y1=\"65\" y2=\"65\" stroke=\"red\" stroke-width=\"2\"/>"
         "<text x=\"125\" y=\"69\">F1</text>\n"
         "<line x1=\"160\" x2=\"190\" y1=\"65\" y2=\"65\" stroke=\"red\" stroke-width=\"2\" "
         "stroke-dasharray=\"8,4\"/><text x=\"195\" y=\"69\">F1 overall</text>\n"
         "<line x1=\"270\" x2=\"300\" y1=\"65\" y2=\"65\" stroke=\"blue\" stroke-width=\"2\"/>"
         "<text x=\"305\" y=\"69\">Defer rate</text>\n";
  if (baseline_f1) {
    svg += "<line x1=\"380\" x2=\"410\" y1=\"65\" y2=\"65\" stroke=\"red\" "
           "stroke-dasharray=\"2,4\"/><text x=\"415\" y=\"69\">No-defer F1 " +
           fmt("%.3f", *baseline_f1) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace ldu
