#pragma once

#include <string>
#include <vector>

namespace corrkit {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;  // requires every x > 0
};

// Self-contained SVG line chart (no external assets or scripts); output is a
// deterministic function of the inputs.
void write_line_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                         const PlotOptions& options);

// Density-normalized histogram with an optional reference curve drawn on the
// same density scale.
void write_histogram_svg(const std::string& path, const std::vector<double>& values, int n_bins,
                         const PlotOptions& options,
                         const std::vector<double>& overlay_x = {},
                         const std::vector<double>& overlay_y = {});

}  // namespace corrkit
