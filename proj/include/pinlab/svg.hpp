#pragma once

#include <string>
#include <vector>

namespace pinlab {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool steps = false;   // draw as a staircase (lattice profiles)
};

struct PlotSpec {
    std::string title;
    std::string x_label, y_label;
    bool log_x = false, log_y = false;
    int width = 720, height = 440;
};

/// Self-contained SVG line chart. Non-finite points and, on log axes,
/// non-positive ones are skipped.
std::string line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace pinlab
