#include "pinlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pinlab {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Axis {
    bool log = false;
    double lo = 0.0, hi = 1.0;

    double map(double v) const { return log ? std::log10(v) : v; }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    Axis ax{spec.log_x}, ay{spec.log_y};
    bool any = false;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
            const double mx = ax.map(s.x[i]), my = ay.map(s.y[i]);
            if (!any) {
                x0 = x1 = mx;
                y0 = y1 = my;
                any = true;
            }
            x0 = std::min(x0, mx);
            x1 = std::max(x1, mx);
            y0 = std::min(y0, my);
            y1 = std::max(y1, my);
        }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    ax.lo = x0;
    ax.hi = x1;
    ay.lo = y0 - pad;
    ay.hi = y1 + pad;

    const double W = spec.width, H = spec.height;
    const double left = 72, right = 160, top = 36, bottom = 52;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double mx) { return left + (mx - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double my) { return top + ph - (my - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fmt(W / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
      << "</text>\n";
    o << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double mx = ax.lo + (ax.hi - ax.lo) * t / 4.0;
        const double my = ay.lo + (ay.hi - ay.lo) * t / 4.0;
        const double vx = ax.log ? std::pow(10.0, mx) : mx;
        const double vy = ay.log ? std::pow(10.0, my) : my;
        o << "<line x1=\"" << fmt(px(mx)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(mx)) << "\" y2=\""
          << fmt(top + ph + 5) << "\" stroke=\"#444\"/>\n";
        o << "<text x=\"" << fmt(px(mx)) << "\" y=\"" << fmt(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(vx) << "</text>\n";
        o << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(py(my)) << "\" x2=\"" << fmt(left) << "\" y2=\""
          << fmt(py(my)) << "\" stroke=\"#444\"/>\n";
        o << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(my) + 4) << "\" text-anchor=\"end\">"
          << tick_label(vy) << "</text>\n";
    }
    o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(H - 12) << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << (ax.log ? " (log)" : "") << "</text>\n";
    o << "<text x=\"16\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt(top + ph / 2) << ")\">" << escape(spec.y_label) << (ay.log ? " (log)" : "") << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
        std::ostringstream path;
        bool pen = false;
        double last_y = 0.0;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) {
                pen = false;
                continue;
            }
            const double X = px(ax.map(s.x[i])), Y = py(ay.map(s.y[i]));
            if (pen && s.steps) path << " L" << fmt(X) << "," << fmt(last_y);
            path << (pen ? " L" : " M") << fmt(X) << "," << fmt(Y);
            pen = true;
            last_y = Y;
        }
        o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        o << "<line x1=\"" << fmt(W - right + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(W - right + 32)
          << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fmt(W - right + 38) << "\" y=\"" << fmt(ly) << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace pinlab
