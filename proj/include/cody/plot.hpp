#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cody/common.hpp"

namespace cody {

/// Minimal SVG line-chart writer for learning curves: per-series polyline
/// with an optional shaded band (mean +- interval across seeds).
class LinePlot {
 public:
  struct Series {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> band_lo, band_hi;  // optional, same length as x
    std::string color;
  };

  LinePlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add_series(Series s) {
    if (s.color.empty()) s.color = kPalette[series_.size() % kPalette.size()];
    series_.push_back(std::move(s));
  }

  void save(const std::string& path) const {
    const int W = 860, H = 520;
    const int L = 80, R = 30, T = 50, B = 60;
    double xmin = std::numeric_limits<double>::max(), xmax = std::numeric_limits<double>::lowest();
    double ymin = xmin, ymax = xmax;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        const double lo = s.band_lo.empty() ? s.y[i] : s.band_lo[i];
        const double hi = s.band_hi.empty() ? s.y[i] : s.band_hi[i];
        ymin = std::min(ymin, lo);
        ymax = std::max(ymax, hi);
      }
    if (!(xmin < xmax)) {
      xmin -= 1;
      xmax += 1;
    }
    if (!(ymin < ymax)) {
      ymin -= 1;
      ymax += 1;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='24' font-size='16' text-anchor='middle' "
        << "font-family='sans-serif'>" << escape(title_) << "</text>\n";

    // Axes and ticks.
    svg << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
        << "' stroke='black'/>\n";
    svg << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double xv = xmin + (xmax - xmin) * i / 5.0;
      const double yv = ymin + (ymax - ymin) * i / 5.0;
      svg << "<line x1='" << px(xv) << "' y1='" << H - B << "' x2='" << px(xv) << "' y2='"
          << H - B + 5 << "' stroke='black'/>\n";
      svg << "<text x='" << px(xv) << "' y='" << H - B + 20
          << "' font-size='11' text-anchor='middle' font-family='sans-serif'>" << fmt(xv)
          << "</text>\n";
      svg << "<line x1='" << L - 5 << "' y1='" << py(yv) << "' x2='" << L << "' y2='" << py(yv)
          << "' stroke='black'/>\n";
      svg << "<text x='" << L - 8 << "' y='" << py(yv) + 4
          << "' font-size='11' text-anchor='end' font-family='sans-serif'>" << fmt(yv)
          << "</text>\n";
    }
    svg << "<text x='" << (L + W - R) / 2 << "' y='" << H - 15
        << "' font-size='13' text-anchor='middle' font-family='sans-serif'>" << escape(xlabel_)
        << "</text>\n";
    svg << "<text x='18' y='" << (T + H - B) / 2
        << "' font-size='13' text-anchor='middle' font-family='sans-serif' transform='rotate(-90 "
        << "18 " << (T + H - B) / 2 << ")'>" << escape(ylabel_) << "</text>\n";

    for (const auto& s : series_) {
      if (!s.band_lo.empty() && s.band_lo.size() == s.x.size()) {
        svg << "<path d='M";
        for (std::size_t i = 0; i < s.x.size(); ++i)
          svg << px(s.x[i]) << ' ' << py(s.band_hi[i]) << (i + 1 < s.x.size() ? " L" : " ");
        for (std::size_t i = s.x.size(); i-- > 0;)
          svg << "L" << px(s.x[i]) << ' ' << py(s.band_lo[i]) << ' ';
        svg << "Z' fill='" << s.color << "' fill-opacity='0.18' stroke='none'/>\n";
      }
      svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='2' points='";
      for (std::size_t i = 0; i < s.x.size(); ++i) svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      svg << "'/>\n";
    }

    // Legend.
    double ly = T + 8;
    for (const auto& s : series_) {
      svg << "<line x1='" << W - R - 150 << "' y1='" << ly << "' x2='" << W - R - 120 << "' y2='"
          << ly << "' stroke='" << s.color << "' stroke-width='3'/>\n";
      svg << "<text x='" << W - R - 114 << "' y='" << ly + 4
          << "' font-size='12' font-family='sans-serif'>" << escape(s.label) << "</text>\n";
      ly += 18;
    }
    svg << "</svg>\n";

    std::ofstream os(path);
    check(os.good(), "LinePlot: cannot write " + path);
    os << svg.str();
  }

 private:
  static std::string fmt(double v) {
    std::ostringstream os;
    if (std::abs(v) >= 10000)
      os << v / 1000.0 << "k";
    else
      os << std::round(v * 100.0) / 100.0;
    return os.str();
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }

  static constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                          "#9467bd", "#ff7f0e", "#8c564b"};

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
};

}  // namespace cody
