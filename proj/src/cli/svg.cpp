#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cli/cli.hpp"

namespace ume::cli {
namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
constexpr const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

// Tick step of 1, 2 or 5 times a power of ten giving about `target` intervals.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (m * p >= raw) return m * p;
    return 10 * p;
}

std::pair<double, double> data_range(const Plot& p, bool x_axis) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : p.series) {
        const auto& v = x_axis ? s.x : s.y;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) continue;
            const double e = (!x_axis && i < s.err.size()) ? s.err[i] : 0.0;
            lo = std::min(lo, v[i] - e);
            hi = std::max(hi, v[i] + e);
        }
    }
    if (!std::isfinite(lo)) return {0.0, 1.0};
    if (hi - lo < 1e-12) return {lo - 0.5, hi + 0.5};
    const double pad = x_axis ? 0.0 : 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string plot_svg(const Plot& p) {
    const auto [x0, x1] = p.xrange.value_or(data_range(p, true));
    const auto [y0, y1] = p.yrange.value_or(data_range(p, false));
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };
    auto inside = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && x >= x0 && x <= x1 && y >= y0 && y <= y1;
    };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(p.title)
      << "</text>\n";

    // Axes and ticks.
    o << "<g stroke=\"#333\" fill=\"none\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\"/></g>\n<g fill=\"#333\">\n";
    const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs)
        o << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(sx(t)) << "\" y2=\""
          << kTop + ph + 5 << "\" stroke=\"#333\"/><text x=\"" << num(sx(t)) << "\" y=\"" << kTop + ph + 18
          << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys)
        o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << kLeft << "\" y2=\""
          << num(sy(t)) << "\" stroke=\"#333\"/><text x=\"" << kLeft - 8 << "\" y=\"" << num(sy(t) + 4)
          << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(p.xlabel) << "</text>\n"
      << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(p.ylabel) << "</text>\n</g>\n";

    o << "<defs><clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\"/></clipPath></defs>\n<g clip-path=\"url(#plot)\">\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const char* color = kColors[k % std::size(kColors)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        switch (s.style) {
            case Series::Style::Line: {
                o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
                for (std::size_t i = 0; i < n; ++i)
                    if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
                o << "\"/>\n";
                break;
            }
            case Series::Style::Steps: {
                // x holds n + 1 bin edges, y holds n heights.
                o << "<path fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"" << color << "\" d=\"";
                if (s.x.size() == s.y.size() + 1 && !s.y.empty()) {
                    o << 'M' << num(sx(s.x[0])) << ' ' << num(sy(std::max(y0, 0.0)));
                    for (std::size_t i = 0; i < s.y.size(); ++i)
                        o << " L" << num(sx(s.x[i])) << ' ' << num(sy(s.y[i])) << " L" << num(sx(s.x[i + 1])) << ' '
                          << num(sy(s.y[i]));
                    o << " L" << num(sx(s.x.back())) << ' ' << num(sy(std::max(y0, 0.0))) << " Z";
                }
                o << "\"/>\n";
                break;
            }
            case Series::Style::Points: {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!inside(s.x[i], s.y[i])) continue;
                    if (i < s.err.size() && s.err[i] > 0)
                        o << "<line x1=\"" << num(sx(s.x[i])) << "\" y1=\"" << num(sy(s.y[i] - s.err[i])) << "\" x2=\""
                          << num(sx(s.x[i])) << "\" y2=\"" << num(sy(s.y[i] + s.err[i])) << "\" stroke=\"" << color
                          << "\"/>";
                    o << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"2.5\" fill=\""
                      << color << "\"/>\n";
                }
                break;
            }
        }
    }
    o << "</g>\n<g>\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const double y = kTop + 14 + 16 * k, x = kLeft + pw - 210;
        o << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"14\" height=\"10\" fill=\""
          << kColors[k % std::size(kColors)] << "\"/><text x=\"" << x + 20 << "\" y=\"" << y << "\">"
          << escape(p.series[k].label) << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

}  // namespace ume::cli
