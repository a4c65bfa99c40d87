#pragma once
// A small SVG renderer for diagnostic plots: scatter points, polylines,
// filled bands, dashed rectangles, axes with tick labels. Deterministic
// output (coordinates fixed to two decimals).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace pansig {

struct SvgPoint {
    double x = 0.0, y = 0.0;
    std::string color = "black";
    std::string label;
};

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width = 640,
            int height = 480)
        : title_(std::move(title)),
          xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)),
          width_(width),
          height_(height) {}

    void set_range(double xmin, double xmax, double ymin, double ymax) {
        xmin_ = xmin;
        xmax_ = xmax;
        ymin_ = ymin;
        ymax_ = ymax;
        fixed_range_ = true;
    }

    void add_point(double x, double y, std::string color = "black", std::string label = {}) {
        points_.push_back({x, y, std::move(color), std::move(label)});
        grow(x, y);
    }

    void add_line(std::vector<std::pair<double, double>> pts, std::string color = "black",
                  bool dashed = false) {
        for (const auto& [x, y] : pts) grow(x, y);
        lines_.push_back({std::move(pts), std::move(color), dashed});
    }

    // Filled vertical band between lo[k] and hi[k] at xs[k].
    void add_band(const std::vector<double>& xs, const std::vector<double>& lo,
                  const std::vector<double>& hi, std::string color = "#cccccc") {
        if (xs.size() != lo.size() || xs.size() != hi.size())
            throw DataError("svg: band arrays must have equal length");
        for (std::size_t k = 0; k < xs.size(); ++k) {
            grow(xs[k], lo[k]);
            grow(xs[k], hi[k]);
        }
        bands_.push_back({xs, lo, hi, std::move(color)});
    }

    void add_rect(double x0, double y0, double x1, double y1, std::string color = "black") {
        grow(x0, y0);
        grow(x1, y1);
        rects_.push_back({x0, y0, x1, y1, std::move(color)});
    }

    std::string render() const {
        double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
        if (!fixed_range_) {
            if (!(xmin <= xmax)) { xmin = 0.0; xmax = 1.0; }
            if (!(ymin <= ymax)) { ymin = 0.0; ymax = 1.0; }
            const double xpad = (xmax > xmin ? xmax - xmin : 1.0) * 0.06;
            const double ypad = (ymax > ymin ? ymax - ymin : 1.0) * 0.06;
            xmin -= xpad; xmax += xpad;
            ymin -= ypad; ymax += ypad;
        }
        const double L = 62, R = 18, T = 34, B = 46;  // margins
        const double pw = width_ - L - R;
        const double ph = height_ - T - B;
        const auto X = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
        const auto Y = [&](double y) { return T + (ymax - y) / (ymax - ymin) * ph; };

        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
            << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
        out << "<rect width=\"" << width_ << "\" height=\"" << height_
            << "\" fill=\"white\"/>\n";
        out << "<text x=\"" << width_ / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">"
            << escape(title_) << "</text>\n";

        // Bands under everything else.
        for (const auto& b : bands_) {
            out << "<polygon fill=\"" << b.color << "\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
            for (std::size_t k = 0; k < b.xs.size(); ++k)
                out << fmt_fixed(X(b.xs[k]), 2) << ',' << fmt_fixed(Y(b.hi[k]), 2) << ' ';
            for (std::size_t k = b.xs.size(); k-- > 0;)
                out << fmt_fixed(X(b.xs[k]), 2) << ',' << fmt_fixed(Y(b.lo[k]), 2) << ' ';
            out << "\"/>\n";
        }

        // Axes box and ticks.
        out << "<rect x=\"" << fmt_fixed(L, 2) << "\" y=\"" << fmt_fixed(T, 2) << "\" width=\""
            << fmt_fixed(pw, 2) << "\" height=\"" << fmt_fixed(ph, 2)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : ticks(xmin, xmax)) {
            out << "<line x1=\"" << fmt_fixed(X(t), 2) << "\" y1=\"" << fmt_fixed(T + ph, 2)
                << "\" x2=\"" << fmt_fixed(X(t), 2) << "\" y2=\"" << fmt_fixed(T + ph + 5, 2)
                << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << fmt_fixed(X(t), 2) << "\" y=\"" << fmt_fixed(T + ph + 18, 2)
                << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
                << tick_label(t) << "</text>\n";
        }
        for (double t : ticks(ymin, ymax)) {
            out << "<line x1=\"" << fmt_fixed(L - 5, 2) << "\" y1=\"" << fmt_fixed(Y(t), 2)
                << "\" x2=\"" << fmt_fixed(L, 2) << "\" y2=\"" << fmt_fixed(Y(t), 2)
                << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << fmt_fixed(L - 8, 2) << "\" y=\"" << fmt_fixed(Y(t) + 4, 2)
                << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
                << tick_label(t) << "</text>\n";
        }
        out << "<text x=\"" << width_ / 2 << "\" y=\"" << height_ - 8
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << escape(xlabel_) << "</text>\n";
        out << "<text x=\"14\" y=\"" << height_ / 2
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "transform=\"rotate(-90 14 "
            << height_ / 2 << ")\">" << escape(ylabel_) << "</text>\n";

        for (const auto& r : rects_) {
            out << "<rect x=\"" << fmt_fixed(std::min(X(r.x0), X(r.x1)), 2) << "\" y=\""
                << fmt_fixed(std::min(Y(r.y0), Y(r.y1)), 2) << "\" width=\""
                << fmt_fixed(std::abs(X(r.x1) - X(r.x0)), 2) << "\" height=\""
                << fmt_fixed(std::abs(Y(r.y1) - Y(r.y0)), 2) << "\" fill=\"none\" stroke=\""
                << r.color << "\" stroke-dasharray=\"4 3\"/>\n";
        }
        for (const auto& l : lines_) {
            out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\"";
            if (l.dashed) out << " stroke-dasharray=\"5 3\"";
            out << " points=\"";
            for (const auto& [x, y] : l.pts)
                out << fmt_fixed(X(x), 2) << ',' << fmt_fixed(Y(y), 2) << ' ';
            out << "\"/>\n";
        }
        for (const auto& p : points_) {
            out << "<circle cx=\"" << fmt_fixed(X(p.x), 2) << "\" cy=\"" << fmt_fixed(Y(p.y), 2)
                << "\" r=\"3\" fill=\"" << p.color << "\"/>\n";
            if (!p.label.empty())
                out << "<text x=\"" << fmt_fixed(X(p.x) + 4, 2) << "\" y=\""
                    << fmt_fixed(Y(p.y) - 4, 2)
                    << "\" font-size=\"9\" font-family=\"sans-serif\">" << escape(p.label)
                    << "</text>\n";
        }
        out << "</svg>\n";
        return out.str();
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + path.string());
        out << render();
        if (!out) throw DataError("write failed: " + path.string());
    }

  private:
    struct Line {
        std::vector<std::pair<double, double>> pts;
        std::string color;
        bool dashed = false;
    };
    struct Band {
        std::vector<double> xs, lo, hi;
        std::string color;
    };
    struct Rect {
        double x0, y0, x1, y1;
        std::string color;
    };

    void grow(double x, double y) {
        if (fixed_range_) return;
        xmin_ = std::min(xmin_, x);
        xmax_ = std::max(xmax_, x);
        ymin_ = std::min(ymin_, y);
        ymax_ = std::max(ymax_, y);
    }

    // Around five round-valued ticks (1/2/5 x 10^k spacing).
    static std::vector<double> ticks(double lo, double hi) {
        const double span = hi - lo;
        if (!(span > 0.0)) return {lo};
        const double rough = span / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(rough)));
        double step = mag;
        for (double mult : {1.0, 2.0, 5.0, 10.0}) {
            if (mag * mult >= rough) {
                step = mag * mult;
                break;
            }
        }
        std::vector<double> out;
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
            out.push_back(t == 0.0 ? 0.0 : t);  // normalize -0
        return out;
    }

    static std::string tick_label(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out.push_back(c);
            }
        }
        return out;
    }

    std::string title_, xlabel_, ylabel_;
    int width_, height_;
    double xmin_ = std::numeric_limits<double>::infinity();
    double xmax_ = -std::numeric_limits<double>::infinity();
    double ymin_ = std::numeric_limits<double>::infinity();
    double ymax_ = -std::numeric_limits<double>::infinity();
    bool fixed_range_ = false;
    std::vector<SvgPoint> points_;
    std::vector<Line> lines_;
    std::vector<Band> bands_;
    std::vector<Rect> rects_;
};

}  // namespace pansig
