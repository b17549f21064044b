#pragma once

#include <string>
#include <vector>

namespace msmpolicy::cli {

struct ChartSeries {
  std::string name;
  std::string color;  // any SVG color
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lower;  // band; same length as x
  std::vector<double> upper;
};

/// Static line chart on a fixed 800x500 viewBox: one band polygon and one
/// polyline per series, axes with five ticks each, and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series);

}  // namespace msmpolicy::cli
