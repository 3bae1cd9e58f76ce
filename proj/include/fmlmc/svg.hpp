#pragma once

#include <string>
#include <vector>

namespace fmlmc {

/// Minimal standalone SVG charts for the experiment artifacts.  Everything is
/// rendered from the already-written CSV data with fixed deterministic
/// formatting, so re-running a config reproduces the plots byte for byte.

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 760;
  int height = 480;
};

/// Line plot; on log axes, nonpositive samples are dropped from their series.
std::string line_plot_svg(const PlotOptions& options, const std::vector<PlotSeries>& series);

/// Grouped bar chart: one cluster per group, one bar per series label.
/// Log-scale bars rise from the decade floor below the smallest value.
struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series label, NaN leaves a gap
};

std::string bar_chart_svg(const PlotOptions& options, const std::vector<std::string>& series_labels,
                          const std::vector<BarGroup>& groups);

/// Cell heatmap of a row-major nx*ny grid (index j*nx + i), dark-to-warm
/// color ramp, optionally over log10 of the values.
std::string heatmap_svg(const PlotOptions& options, int nx, int ny,
                        const std::vector<double>& values, bool log_scale);

}  // namespace fmlmc
