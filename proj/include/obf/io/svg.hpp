#pragma once

// Minimal deterministic SVG line charts. Same input, same bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace obf::io {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 720;
  int height = 440;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

inline std::string escape_xml(const std::string& s) {
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

// Tick step from {1, 2, 5} x 10^k giving at most ~6 ticks.
inline double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

inline std::string tick_label(double v, double step) {
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  return fixed(v, digits);
}

}  // namespace detail

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string render_svg(const LineChart& chart) {
  const double left = 80.0;
  const double right = 190.0;
  const double top = 40.0;
  const double bottom = 60.0;
  const double pw = chart.width - left - right;
  const double ph = chart.height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : chart.series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmin -= 1.0, xmax += 1.0;
  if (ymax == ymin) ymin -= 1.0, ymax += 1.0;
  const double xstep = detail::tick_step(xmax - xmin);
  const double ystep = detail::tick_step(ymax - ymin);
  xmin = std::floor(xmin / xstep) * xstep;
  xmax = std::ceil(xmax / xstep) * xstep;
  ymin = std::floor(ymin / ystep) * ystep;
  ymax = std::ceil(ymax / ystep) * ystep;

  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  using detail::fixed;

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) + "\" height=\"" +
       std::to_string(chart.height) + "\" viewBox=\"0 0 " + std::to_string(chart.width) + " " +
       std::to_string(chart.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape_xml(chart.title) + "</text>\n";

  o += "<g class=\"grid\" stroke=\"#e0e0e0\" stroke-width=\"1\">\n";
  const int nx = static_cast<int>(std::llround((xmax - xmin) / xstep));
  const int ny = static_cast<int>(std::llround((ymax - ymin) / ystep));
  for (int i = 0; i <= nx; ++i) {
    const double x = sx(xmin + i * xstep);
    o += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(x) + "\" y2=\"" + fixed(top + ph) + "\"/>\n";
  }
  for (int i = 0; i <= ny; ++i) {
    const double y = sy(ymin + i * ystep);
    o += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left + pw) + "\" y2=\"" + fixed(y) + "\"/>\n";
  }
  o += "</g>\n";

  o += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  o += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(left + pw) + "\" y2=\"" + fixed(top + ph) + "\"/>\n";
  o += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) + "\" y2=\"" + fixed(top + ph) + "\"/>\n";
  o += "</g>\n";

  o += "<g class=\"ticks\">\n";
  for (int i = 0; i <= nx; ++i) {
    const double v = xmin + i * xstep;
    o += "<text x=\"" + fixed(sx(v)) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" +
         detail::tick_label(v, xstep) + "</text>\n";
  }
  for (int i = 0; i <= ny; ++i) {
    const double v = ymin + i * ystep;
    o += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(sy(v) + 4) + "\" text-anchor=\"end\">" +
         detail::tick_label(v, ystep) + "</text>\n";
  }
  o += "</g>\n";
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(chart.height - 16.0) + "\" text-anchor=\"middle\">" +
       detail::escape_xml(chart.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + fixed(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed(top + ph / 2) + ")\">" + detail::escape_xml(chart.y_label) + "</text>\n";

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& series = chart.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    o += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) o += ' ';
      o += fixed(sx(x)) + "," + fixed(sy(y));
      first = false;
    }
    o += "\"/>\n";
    for (const auto& [x, y] : series.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      o += "<circle cx=\"" + fixed(sx(x)) + "\" cy=\"" + fixed(sy(y)) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
  }

  o += "<g class=\"legend\">\n";
  const double lx = left + pw + 16;
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const double ly = top + 10 + 20.0 * static_cast<double>(s);
    const char* color = kPalette[s % std::size(kPalette)];
    o += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(lx + 24) + "\" y2=\"" + fixed(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fixed(lx + 30) + "\" y=\"" + fixed(ly + 4) + "\">" + detail::escape_xml(chart.series[s].name) + "</text>\n";
  }
  o += "</g>\n</svg>\n";
  return o;
}

}  // namespace obf::io
