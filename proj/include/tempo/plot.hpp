#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tempo::plot {

struct Series {
    std::string name;
    std::vector<double> y;
    std::size_t x0 = 0;  // x of y[0]
};

/// Line chart with axes and a legend as SVG at `svg_path`, plus the plotted
/// values as CSV next to it (same stem, .csv). Output bytes depend only on
/// the input. Throws on an empty series list or an empty series.
void emit_plot(const std::vector<Series>& series, const std::filesystem::path& svg_path,
               const std::string& title = "");

std::string render_svg(const std::vector<Series>& series, const std::string& title);
std::string render_csv(const std::vector<Series>& series);

} // namespace tempo::plot
