#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "adprog/csv.hpp"

namespace adprog {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal deterministic SVG line chart: fixed canvas, two-decimal
/// coordinates, no timestamps, so output bytes depend only on the data.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
    if (series.empty()) throw std::invalid_argument("write_line_chart: no series");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double width = 640, height = 420;
    const double left = 64, right = 24, top = 40, bottom = 48;
    const auto px = [&](double x) {
        return left + (x - xmin) / (xmax - xmin) * (width - left - right);
    };
    const auto py = [&](double y) {
        return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_line_chart: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
        << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out << "<text x=\"" << fmt_fixed(px(fx), 2) << "\" y=\"" << height - bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_fixed(fx, 1) << "</text>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt_fixed(py(fy) + 4, 2)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_fixed(fy, 2) << "</text>\n";
        if (i > 0)
            out << "<line x1=\"" << left << "\" y1=\"" << fmt_fixed(py(fy), 2) << "\" x2=\""
                << width - right << "\" y2=\"" << fmt_fixed(py(fy), 2)
                << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (top + height - bottom) / 2 << ")\">" << y_label << "</text>\n";
    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (i) out << " ";
            out << fmt_fixed(px(series[s].x[i]), 2) << "," << fmt_fixed(py(series[s].y[i]), 2);
        }
        out << "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << width - right - 140 << "\" y1=\"" << ly << "\" x2=\""
            << width - right - 116 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - right - 110 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_line_chart: write failed for " + path);
}

}  // namespace adprog
