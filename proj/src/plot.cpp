#include "tempo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "tempo/errors.hpp"

namespace tempo::plot {
namespace {

constexpr double kW = 800, kH = 400, kLeft = 60, kRight = 160, kTop = 30, kBottom = 40;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string fmt(double v, const char* f = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else if (c == '"') out += "&quot;";
        else out += c;
    }
    return out;
}

void check(const std::vector<Series>& series) {
    if (series.empty()) throw ValidationError("shape", "plot: no series");
    for (const auto& s : series)
        if (s.y.empty()) throw ValidationError("shape", "plot: series '" + s.name + "' is empty");
}

} // namespace

std::string render_svg(const std::vector<Series>& series, const std::string& title) {
    check(series);
    double xmin = std::numeric_limits<double>::max(), xmax = std::numeric_limits<double>::lowest();
    double ymin = xmin, ymax = xmax;
    for (const auto& s : series) {
        xmin = std::min(xmin, static_cast<double>(s.x0));
        xmax = std::max(xmax, static_cast<double>(s.x0 + s.y.size() - 1));
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymin -= 1;
        ymax += 1;
    }
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kW, "%.0f") + "\" height=\"" + fmt(kH, "%.0f") +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        o += "<text x=\"" + fmt(kLeft) + "\" y=\"18\" font-size=\"14\">" + escape(title) + "</text>\n";
    // axes
    o += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(kLeft + pw) + "\" y2=\"" +
         fmt(kTop + ph) + "\" stroke=\"black\"/>\n";
    o += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(kTop + ph) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        o += "<text x=\"" + fmt(kLeft - 5) + "\" y=\"" + fmt(py(fy) + 4) + "\" text-anchor=\"end\">" +
             fmt(fy, "%.3g") + "</text>\n";
        o += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
             fmt(fx, "%.0f") + "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.y.size(); ++i)
            o += (i ? " " : "") + fmt(px(static_cast<double>(s.x0 + i))) + "," + fmt(py(s.y[i]));
        o += "\"/>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
        o += "<line x1=\"" + fmt(kW - kRight + 10) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(kW - kRight + 30) +
             "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        o += "<text class=\"legend\" x=\"" + fmt(kW - kRight + 35) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(s.name) +
             "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

std::string render_csv(const std::vector<Series>& series) {
    check(series);
    std::string o = "series,x,y\n";
    char buf[64];
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", s.y[i]);
            o += s.name + "," + std::to_string(s.x0 + i) + "," + buf + "\n";
        }
    return o;
}

void emit_plot(const std::vector<Series>& series, const std::filesystem::path& svg_path, const std::string& title) {
    const std::string svg = render_svg(series, title);
    const std::string csv = render_csv(series);
    if (svg_path.has_parent_path()) std::filesystem::create_directories(svg_path.parent_path());
    std::ofstream(svg_path, std::ios::binary) << svg;
    auto csv_path = svg_path;
    csv_path.replace_extension(".csv");
    std::ofstream(csv_path, std::ios::binary) << csv;
}

} // namespace tempo::plot
