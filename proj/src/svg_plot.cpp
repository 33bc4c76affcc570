#include "apfsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace apfsim::io {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series, int width, int height) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
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
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;

    const int ml = 70, mr = 20, mt = 36, mb = 48;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double x) { return ml + pw * (x - xmin) / (xmax - xmin); };
    auto py = [&](double y) { return mt + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

    for (int g = 0; g <= 4; ++g) {
        const double yv = ymin + (ymax - ymin) * g / 4.0;
        const double xv = xmin + (xmax - xmin) * g / 4.0;
        f << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << width - mr
          << "\" y2=\"" << py(yv) << "\" stroke=\"#dddddd\"/>\n";
        f << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
        f << "<text x=\"" << px(xv) << "\" y=\"" << height - mb + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
    }
    f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";

    int li = 0;
    for (const auto& s : series) {
        f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        const std::size_t stride = std::max<std::size_t>(1, n / 4000);
        for (std::size_t i = 0; i < n; i += stride) {
            f << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
        }
        f << "\"/>\n";
        f << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * li << "\" font-size=\"12\" fill=\""
          << s.color << "\">" << s.label << "</text>\n";
        ++li;
    }
    f << "<text x=\"" << width / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    f << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << mt + ph / 2
      << ")\">" << y_label << "</text>\n";
    f << "</svg>\n";
}

}  // namespace apfsim::io
