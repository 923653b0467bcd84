#pragma once

#include <string>
#include <vector>

namespace alise {

/// Minimal line-chart renderer writing binary PPM images; used by --plot.
struct PlotSeries {
  std::string label;
  std::vector<double> y;  // x is the index
};

void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<PlotSeries>& series, int width = 640, int height = 400);

}  // namespace alise
