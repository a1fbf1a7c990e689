#include "fedcontrib/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fedcontrib/errors.hpp"

namespace fedcontrib::svg {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

std::string tick_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c); break;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double clamp_span() const { return hi > lo ? hi - lo : 1.0; }
};

Range value_range(const std::vector<double>& values, bool include_zero) {
    Range r;
    if (values.empty()) return r;
    r.lo = *std::min_element(values.begin(), values.end());
    r.hi = *std::max_element(values.begin(), values.end());
    if (include_zero) {
        r.lo = std::min(r.lo, 0.0);
        r.hi = std::max(r.hi, 0.0);
    }
    if (r.lo == r.hi) {
        r.lo -= 1.0;
        r.hi += 1.0;
    }
    const double pad = 0.05 * (r.hi - r.lo);
    if (r.lo != 0.0 || !include_zero) r.lo -= pad;
    if (r.hi != 0.0 || !include_zero) r.hi += pad;
    return r;
}

void open_svg(std::ostringstream& out, int width, int height, const std::string& title) {
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    out << "<rect width='" << width << "' height='" << height << "' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-family='sans-serif' "
        << "font-size='14' font-weight='bold'>" << escape(title) << "</text>\n";
}

void y_axis(std::ostringstream& out, const Range& range, int width, int height,
            const std::string& label) {
    const int plot_h = height - kMarginTop - kMarginBottom;
    const int x0 = kMarginLeft;
    const int x1 = width - kMarginRight;
    for (int t = 0; t <= 4; ++t) {
        const double v = range.lo + (range.hi - range.lo) * t / 4.0;
        const double y = kMarginTop + plot_h - plot_h * (v - range.lo) / range.clamp_span();
        out << "<line x1='" << x0 << "' y1='" << fmt(y) << "' x2='" << x1 << "' y2='" << fmt(y)
            << "' stroke='#dddddd'/>\n";
        out << "<text x='" << x0 - 6 << "' y='" << fmt(y + 4)
            << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << tick_text(v)
            << "</text>\n";
    }
    out << "<text x='14' y='" << kMarginTop + plot_h / 2
        << "' text-anchor='middle' font-family='sans-serif' font-size='11' "
        << "transform='rotate(-90 14 " << kMarginTop + plot_h / 2 << ")'>" << escape(label)
        << "</text>\n";
}

} // namespace

std::string BarChart::render() const {
    if (labels.size() != values.size()) throw DataError("bar chart labels/values mismatch");
    std::ostringstream out;
    open_svg(out, width, height, title);
    const Range range = value_range(values, /*include_zero=*/true);
    const int plot_w = width - kMarginLeft - kMarginRight;
    const int plot_h = height - kMarginTop - kMarginBottom;
    y_axis(out, range, width, height, y_label);

    const std::size_t n = values.size();
    const double slot = n > 0 ? static_cast<double>(plot_w) / static_cast<double>(n) : plot_w;
    const double bar_w = std::max(2.0, slot * 0.7);
    const double y_zero =
        kMarginTop + plot_h - plot_h * (0.0 - range.lo) / range.clamp_span();

    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        const double y_v = kMarginTop + plot_h - plot_h * (v - range.lo) / range.clamp_span();
        const double x = kMarginLeft + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
        const double top = std::min(y_zero, y_v);
        const double h = std::fabs(y_zero - y_v);
        out << "<rect x='" << fmt(x) << "' y='" << fmt(top) << "' width='" << fmt(bar_w)
            << "' height='" << fmt(h) << "' fill='#4878cf'/>\n";
        const double cx = x + bar_w / 2.0;
        out << "<text x='" << fmt(cx) << "' y='" << height - kMarginBottom + 14
            << "' text-anchor='end' font-family='sans-serif' font-size='9' transform='rotate(-40 "
            << fmt(cx) << " " << height - kMarginBottom + 14 << ")'>" << escape(labels[i])
            << "</text>\n";
    }
    out << "<line x1='" << kMarginLeft << "' y1='" << fmt(y_zero) << "' x2='"
        << width - kMarginRight << "' y2='" << fmt(y_zero) << "' stroke='black'/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string ScatterPlot::render() const {
    std::ostringstream out;
    open_svg(out, width, height, title);

    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& p : points) {
        xs.push_back(p.first);
        ys.push_back(p.second);
    }
    const Range rx = value_range(xs, /*include_zero=*/false);
    const Range ry = value_range(ys, /*include_zero=*/true);
    const int plot_w = width - kMarginLeft - kMarginRight;
    const int plot_h = height - kMarginTop - kMarginBottom;
    y_axis(out, ry, width, height, y_label);

    for (int t = 0; t <= 4; ++t) {
        const double v = rx.lo + (rx.hi - rx.lo) * t / 4.0;
        const double x = kMarginLeft + plot_w * (v - rx.lo) / rx.clamp_span();
        out << "<text x='" << fmt(x) << "' y='" << height - kMarginBottom + 16
            << "' text-anchor='middle' font-family='sans-serif' font-size='10'>" << tick_text(v)
            << "</text>\n";
    }
    out << "<text x='" << kMarginLeft + plot_w / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << escape(x_label)
        << "</text>\n";

    const double y_zero = kMarginTop + plot_h - plot_h * (0.0 - ry.lo) / ry.clamp_span();
    out << "<line x1='" << kMarginLeft << "' y1='" << fmt(y_zero) << "' x2='"
        << width - kMarginRight << "' y2='" << fmt(y_zero) << "' stroke='#999999'/>\n";

    for (const auto& p : points) {
        const double x = kMarginLeft + plot_w * (p.first - rx.lo) / rx.clamp_span();
        const double y = kMarginTop + plot_h - plot_h * (p.second - ry.lo) / ry.clamp_span();
        out << "<circle cx='" << fmt(x) << "' cy='" << fmt(y)
            << "' r='2.2' fill='#c44e52' fill-opacity='0.45'/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace fedcontrib::svg
