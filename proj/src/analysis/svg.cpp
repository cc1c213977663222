#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "fcb/text.hpp"

namespace fcb::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) { return text::format_fixed(v, 2); }

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
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

}  // namespace

std::string render(const Figure& f) {
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool any = false;
    auto widen = [&](const Point& p) {
        if (!any) {
            x_lo = x_hi = p.first;
            y_lo = y_hi = p.second;
            any = true;
        }
        x_lo = std::min(x_lo, p.first);
        x_hi = std::max(x_hi, p.first);
        y_lo = std::min(y_lo, p.second);
        y_hi = std::max(y_hi, p.second);
    };
    for (const auto& s : f.series) {
        for (const auto* pts : {&s.line, &s.scatter, &s.rhombi}) {
            for (const auto& p : *pts) widen(p);
        }
    }
    for (const auto& [x, label] : f.x_ticks) widen({x, y_lo});
    if (f.y_range) std::tie(y_lo, y_hi) = *f.y_range;
    if (x_hi == x_lo) {
        x_lo -= 1;
        x_hi += 1;
    }
    const double x_pad = 0.04 * (x_hi - x_lo);
    x_lo -= x_pad;
    x_hi += x_pad;
    if (y_hi == y_lo) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    // High x on the left.
    auto px = [&](double x) { return kLeft + (x_hi - x) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(f.title) << "</text>\n";
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (const auto& [x, label] : f.x_ticks) {
        o << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(x)) << "\" y2=\""
          << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
          << escape(label) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / 4.0;
        o << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(y)) << "\" x2=\"" << num(kLeft + pw)
          << "\" y2=\"" << num(py(y)) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">"
          << text::format_fixed(y, 2) << "</text>\n";
    }
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
      << escape(f.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kTop + ph / 2) << ")\">" << escape(f.y_label) << "</text>\n";

    for (std::size_t i = 0; i < f.series.size(); ++i) {
        const auto& s = f.series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        o << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
        for (const auto& [x, y] : s.scatter) {
            o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2\" fill=\"" << color
              << "\" fill-opacity=\"0.5\"/>\n";
        }
        if (!s.line.empty()) {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (std::size_t k = 0; k < s.line.size(); ++k) {
                o << (k ? " " : "") << num(px(s.line[k].first)) << ',' << num(py(s.line[k].second));
            }
            o << "\"/>\n";
        }
        for (const auto& [x, y] : s.rhombi) {
            const double cx = px(x), cy = py(y);
            o << "<polygon class=\"minmax\" points=\"" << num(cx) << ',' << num(cy - 5) << ' ' << num(cx + 4) << ',' << num(cy) << ' '
              << num(cx) << ',' << num(cy + 5) << ' ' << num(cx - 4) << ',' << num(cy) << "\" fill=\"" << color
              << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
        }
        const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
        o << "<line x1=\"" << num(kWidth - kRight + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
          << num(kWidth - kRight + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(kWidth - kRight + 38) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
          << "</text>\n";
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace fcb::svg
