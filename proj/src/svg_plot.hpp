// svg_plot.hpp
// Minimal line/marker charts written as standalone SVG. Plots are renderings
// of the CSV outputs, never a source of data.
#pragma once

#include <string>
#include <vector>

namespace cylnls::detail {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Points that cannot be drawn (non-finite, or <= 0 on a log axis) are skipped.
std::string render_svg(const PlotSpec& spec);

}  // namespace cylnls::detail
