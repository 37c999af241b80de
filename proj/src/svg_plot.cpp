#include "see/svg_plot.hpp"

#include <algorithm>
#include <cmath>

#include "see/util.hpp"

namespace see {
namespace {

constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 44;
constexpr int kMarginBottom = 58;
constexpr int kTickCount = 5;

const char* const kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string px(double value) { return fmt_fixed(value, 2); }

}  // namespace

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

std::string render_plot_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
    std::size_t total_points = 0;
    for (const auto& s : series) total_points += s.points.size();
    if (total_points == 0) {
        throw ContractError("render_plot_svg: no data points to draw");
    }

    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                throw ContractError("render_plot_svg: non-finite coordinate in series '" + s.label + "'");
            }
            if (first) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                first = false;
            } else {
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (options.y_min) y_lo = *options.y_min;
    if (options.y_max) y_hi = *options.y_max;
    if (x_hi - x_lo < 1e-12) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (y_hi - y_lo < 1e-12) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }

    const double plot_w = options.width - kMarginLeft - kMarginRight;
    const double plot_h = options.height - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto sy = [&](double y) { return kMarginTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) +
           "\" height=\"" + std::to_string(options.height) + "\" viewBox=\"0 0 " +
           std::to_string(options.width) + " " + std::to_string(options.height) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" fill=\"#ffffff\"/>\n";
    svg += "  <text x=\"" + px(options.width / 2.0) +
           "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
           xml_escape(options.title) + "</text>\n";

    // Grid lines and tick labels.
    for (int t = 0; t < kTickCount; ++t) {
        const double frac = static_cast<double>(t) / (kTickCount - 1);
        const double xv = x_lo + frac * (x_hi - x_lo);
        const double yv = y_lo + frac * (y_hi - y_lo);
        const double gx = sx(xv);
        const double gy = sy(yv);
        svg += "  <line x1=\"" + px(gx) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" + px(gx) +
               "\" y2=\"" + px(kMarginTop + plot_h) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "  <line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(gy) + "\" x2=\"" +
               px(kMarginLeft + plot_w) + "\" y2=\"" + px(gy) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + px(gx) + "\" y=\"" + px(kMarginTop + plot_h + 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt_fixed(xv, 2) + "</text>\n";
        svg += "  <text x=\"" + px(kMarginLeft - 8) + "\" y=\"" + px(gy + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
               fmt_fixed(yv, 2) + "</text>\n";
    }

    // Axes.
    svg += "  <line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" +
           px(kMarginLeft) + "\" y2=\"" + px(kMarginTop + plot_h) +
           "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    svg += "  <line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kMarginTop + plot_h) + "\" x2=\"" +
           px(kMarginLeft + plot_w) + "\" y2=\"" + px(kMarginTop + plot_h) +
           "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    svg += "  <text x=\"" + px(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
           px(options.height - 14.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           xml_escape(options.x_label) + "</text>\n";
    svg += "  <text x=\"18\" y=\"" + px(kMarginTop + plot_h / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           px(kMarginTop + plot_h / 2.0) + ")\">" + xml_escape(options.y_label) + "</text>\n";

    // Series.
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % kPaletteSize];
        if (s.draw_line && s.points.size() > 1) {
            std::string pts;
            for (const auto& [x, y] : s.points) {
                if (!pts.empty()) pts += " ";
                pts += px(sx(x)) + "," + px(sy(y));
            }
            svg += "  <polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"2\"/>\n";
        }
        if (s.draw_markers) {
            for (const auto& [x, y] : s.points) {
                svg += "  <circle cx=\"" + px(sx(x)) + "\" cy=\"" + px(sy(y)) +
                       "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
            }
        }
    }

    // Legend (top-right, one row per series).
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        const double ly = kMarginTop + 10.0 + 16.0 * static_cast<double>(i);
        const double lx = kMarginLeft + plot_w - 170.0;
        svg += "  <rect x=\"" + px(lx) + "\" y=\"" + px(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
        svg += "  <text x=\"" + px(lx + 16) + "\" y=\"" + px(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(series[i].label) +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace see
