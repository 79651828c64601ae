#include "capsim/io/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace capsim::io {
namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 480;
constexpr double kMargin = 60;
constexpr std::size_t kMaxPoints = 2000;

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string label_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Frame {
    double x_min, x_max, y_min, y_max;

    double px(double x) const {
        const double span = x_max > x_min ? x_max - x_min : 1.0;
        return kMargin + (x - x_min) / span * (kWidth - 2 * kMargin);
    }
    double py(double y) const {
        const double span = y_max > y_min ? y_max - y_min : 1.0;
        return kHeight - kMargin - (y - y_min) / span * (kHeight - 2 * kMargin);
    }
};

void open_svg(std::ostream& out, const std::string& title, const Frame& f) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n"
        << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
        << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = f.x_min + (f.x_max - f.x_min) * i / 4.0;
        const double y = f.y_min + (f.y_max - f.y_min) * i / 4.0;
        out << "<text x=\"" << fixed(f.px(x)) << "\" y=\"" << kHeight - kMargin + 18
            << "\" text-anchor=\"middle\">" << label_number(x) << "</text>\n";
        out << "<text x=\"" << kMargin - 6 << "\" y=\"" << fixed(f.py(y) + 4) << "\" text-anchor=\"end\">"
            << label_number(y) << "</text>\n";
    }
}

}  // namespace

void write_line_plot(std::ostream& out, const std::string& title, std::span<const PlotSeries> series) {
    Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            f.x_min = std::min(f.x_min, s.x[i]);
            f.x_max = std::max(f.x_max, s.x[i]);
            f.y_min = std::min(f.y_min, s.y[i]);
            f.y_max = std::max(f.y_max, s.y[i]);
        }
    }
    if (f.x_min > f.x_max) f = {0, 1, 0, 1};
    open_svg(out, title, f);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::size_t stride = std::max<std::size_t>(1, s.x.size() / kMaxPoints);
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); i += stride) {
            out << fixed(f.px(s.x[i])) << ',' << fixed(f.py(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 16 + 16 * k
            << "\" text-anchor=\"end\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_histogram(std::ostream& out, const std::string& title, std::span<const HistogramBin> bins) {
    Frame f{0, 1, 0, 1};
    if (!bins.empty()) {
        f.x_min = bins.front().bin_start;
        f.x_max = bins.back().bin_end;
        std::size_t top = 1;
        for (const auto& b : bins) top = std::max(top, b.count);
        f.y_max = static_cast<double>(top);
    }
    open_svg(out, title, f);
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        const double x0 = f.px(b.bin_start);
        const double x1 = f.px(b.bin_end);
        const double y = f.py(static_cast<double>(b.count));
        out << "<rect x=\"" << fixed(x0) << "\" y=\"" << fixed(y) << "\" width=\"" << fixed(x1 - x0)
            << "\" height=\"" << fixed(f.py(0) - y) << "\" fill=\"steelblue\"/>\n";
    }
    out << "</svg>\n";
}

void write_weights_plot(std::ostream& out, const ComponentWeights& weights) {
    const double peak = weights.peak_current();
    std::vector<double> scaled(weights.current);
    if (peak > 0.0) {
        for (auto& j : scaled) j /= peak;
    }
    const std::vector<PlotSeries> series{
        {"P0 (no capture)", weights.times, weights.p_no_capture, "black"},
        {"P1 (capture)", weights.times, weights.p_capture, "firebrick"},
        {"J / peak J", weights.times, scaled, "steelblue"},
    };
    write_line_plot(out, "Component weights and capture current", series);
}

}  // namespace capsim::io
