#ifndef APFSIM_SVG_PLOT_HPP
#define APFSIM_SVG_PLOT_HPP

#include <string>
#include <vector>

namespace apfsim::io {

struct PlotSeries {
    std::string label;
    std::string color = "#1f6fb2";
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal static line chart writer; axes, labels and polylines only.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series, int width = 900, int height = 400);

}  // namespace apfsim::io

#endif
