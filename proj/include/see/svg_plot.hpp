#pragma once

// Minimal deterministic SVG charts for the report command.  No timestamps,
// no randomness, fixed-precision coordinates: re-rendering the same data is
// byte-identical.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace see {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y) in data space
    bool draw_line = true;
    bool draw_markers = true;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 480;
    std::optional<double> y_min;  // default: padded data range
    std::optional<double> y_max;
};

// Line/scatter chart over the given series. Throws ContractError when there
// is nothing to draw.
std::string render_plot_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

std::string xml_escape(const std::string& text);

}  // namespace see
