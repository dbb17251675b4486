#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace softgrip::cli {

struct SvgSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

// Minimal polyline chart, y up. Enough to eyeball sweeps and trajectories;
// the CSV stays the canonical output.
inline void write_svg(const std::string& path, const std::vector<SvgSeries>& series,
                      const std::string& x_label, const std::string& y_label) {
    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                min_x = max_x = x;
                min_y = max_y = y;
                first = false;
            }
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    if (max_x == min_x) max_x = min_x + 1.0;
    if (max_y == min_y) max_y = min_y + 1.0;

    const double width = 640.0, height = 480.0, margin = 60.0;
    auto px = [&](double x) {
        return margin + (x - min_x) / (max_x - min_x) * (width - 2.0 * margin);
    };
    auto py = [&](double y) {
        return height - margin - (y - min_y) / (max_y - min_y) * (height - 2.0 * margin);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("svg: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2.0 << "\" y=\"" << height - 16.0
        << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << height / 2.0
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << height / 2.0 << ")\">" << y_label << "</text>\n";

    double legend_y = margin;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : s.points) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(x), py(y));
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - margin - 150.0 << "\" y=\"" << legend_y
            << "\" font-size=\"13\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
        legend_y += 18.0;
    }
    out << "</svg>\n";
}

} // namespace softgrip::cli
