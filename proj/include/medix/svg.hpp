#pragma once
// Hand-rolled SVG scatter/line plots so experiment outputs need no plotting
// stack. Every plot is rendered from data the caller re-reads out of an
// emitted CSV, keeping plots pure functions of the CSV artifacts.

#include <string>
#include <utility>
#include <vector>

namespace medix {

struct SvgSeries {
  std::string label;
  std::string color;  // any CSS color
  std::vector<std::pair<double, double>> points;
  bool line = false;  // polyline through the points instead of dots
  double radius = 3.0;
};

// 640x480 plot with linear axes, ticks, and a legend.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace medix
