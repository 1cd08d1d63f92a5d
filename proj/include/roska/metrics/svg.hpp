#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace roska::metrics {

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

namespace detail {
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace detail

/// Dependency-free SVG line chart: axes, min/max tick labels, legend, one
/// polyline per series. Output is deterministic for identical inputs.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<ChartSeries>& series, int width = 640,
                                     int height = 400) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;

    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::fmt(width / 2.0) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">" +
           title + "</text>\n";
    // axes
    svg += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(mt) + "\" x2=\"" +
           detail::fmt(ml) + "\" y2=\"" + detail::fmt(mt + ph) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(mt + ph) + "\" x2=\"" +
           detail::fmt(ml + pw) + "\" y2=\"" + detail::fmt(mt + ph) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    // tick labels
    svg += "<text x=\"" + detail::fmt(ml - 6) + "\" y=\"" + detail::fmt(mt + ph) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
           detail::fmt(ymin) + "</text>\n";
    svg += "<text x=\"" + detail::fmt(ml - 6) + "\" y=\"" + detail::fmt(mt + 10) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
           detail::fmt(ymax) + "</text>\n";
    svg += "<text x=\"" + detail::fmt(ml) + "\" y=\"" + detail::fmt(mt + ph + 16) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
           detail::fmt(xmin) + "</text>\n";
    svg += "<text x=\"" + detail::fmt(ml + pw) + "\" y=\"" + detail::fmt(mt + ph + 16) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
           detail::fmt(xmax) + "</text>\n";
    svg += "<text x=\"" + detail::fmt(ml + pw / 2) + "\" y=\"" + detail::fmt(mt + ph + 34) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::fmt(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\""
           "rotate(-90 16 " +
           detail::fmt(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        std::string pts;
        for (const auto& [x, y] : series[s].points) {
            if (!pts.empty()) pts += " ";
            pts += detail::fmt(sx(x)) + "," + detail::fmt(sy(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = mt + 14 + 16 * static_cast<double>(s);
        svg += "<line x1=\"" + detail::fmt(ml + pw - 120) + "\" y1=\"" + detail::fmt(ly - 4) +
               "\" x2=\"" + detail::fmt(ml + pw - 100) + "\" y2=\"" + detail::fmt(ly - 4) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::fmt(ml + pw - 94) + "\" y=\"" + detail::fmt(ly) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" + series[s].label +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace roska::metrics
