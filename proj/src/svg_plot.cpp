// svg_plot.cpp

#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cylnls::detail {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  bool drawable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  void fit(const std::vector<double>& vals) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (double v : vals) {
      if (!drawable(v)) continue;
      const double t = log ? std::log10(v) : v;
      mn = std::min(mn, t);
      mx = std::max(mx, t);
    }
    if (!std::isfinite(mn)) {
      mn = 0;
      mx = 1;
    }
    if (mx - mn < 1e-12) {
      const double pad = log ? 0.5 : std::max(std::abs(mn) * 0.1, 1e-12);
      mn -= pad;
      mx += pad;
    } else if (!log) {
      const double pad = 0.05 * (mx - mn);
      mn -= pad;
      mx += pad;
    }
    lo = mn;
    hi = mx;
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= static_cast<int>(std::floor(hi + 1e-9)); ++e) {
        t.push_back(std::pow(10.0, e));
      }
      if (t.size() < 2) {
        t = {std::pow(10.0, lo), std::pow(10.0, hi)};
      }
      return t;
    }
    for (int k = 0; k <= 4; ++k) t.push_back(lo + (hi - lo) * k / 4.0);
    return t;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  Axis ax{spec.log_x}, ay{spec.log_y};
  std::vector<double> xs, ys;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (ax.drawable(s.x[i]) && ay.drawable(s.y[i])) {
        xs.push_back(s.x[i]);
        ys.push_back(s.y[i]);
      }
    }
  }
  ax.fit(xs);
  ay.fit(ys);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(kWidth / 2 - kRight / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << esc(spec.title) << "</text>\n";
  o << "<rect x=\"" << px(x0) << "\" y=\"" << px(y1) << "\" width=\"" << px(x1 - x0) << "\" height=\""
    << px(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double p = ax.map(t, x0, x1);
    o << "<line x1=\"" << px(p) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(p) << "\" y2=\"" << px(y1)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << px(p) << "\" y=\"" << px(y0 + 16) << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double p = ay.map(t, y0, y1);
    o << "<line x1=\"" << px(x0) << "\" y1=\"" << px(p) << "\" x2=\"" << px(x1) << "\" y2=\"" << px(p)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << px(x0 - 6) << "\" y=\"" << px(p + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(kHeight - 18) << "\" text-anchor=\"middle\">"
    << esc(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << px((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << px((y0 + y1) / 2) << ")\">" << esc(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
      pts += px(ax.map(s.x[i], x0, x1)) + "," + px(ay.map(s.y[i], y0, y1)) + " ";
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.dashed) o << " stroke-dasharray=\"5,4\"";
    o << " points=\"" << pts << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
        o << "<circle cx=\"" << px(ax.map(s.x[i], x0, x1)) << "\" cy=\"" << px(ay.map(s.y[i], y0, y1))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    const double ly = y1 + 14 + 18 * k;
    o << "<line x1=\"" << px(x1 + 12) << "\" y1=\"" << px(ly - 4) << "\" x2=\"" << px(x1 + 36) << "\" y2=\""
      << px(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(x1 + 42) << "\" y=\"" << px(ly) << "\">" << esc(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace cylnls::detail
