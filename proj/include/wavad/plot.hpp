#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace wavad {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 480;
};

// Minimal standalone SVG line plot (axes, ticks, legend).
void write_svg_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options);

}  // namespace wavad
