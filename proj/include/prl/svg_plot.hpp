#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace prl {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct PlotLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Standalone SVG line chart: axes with tick labels, a legend, and one
/// polyline per series. Non-finite points are skipped.
std::string render_svg(const std::vector<Series>& series, const PlotLabels& labels);
void emit_plot(const std::vector<Series>& series, const std::filesystem::path& path,
               const PlotLabels& labels);

}  // namespace prl
