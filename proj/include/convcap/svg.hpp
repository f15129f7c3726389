#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace convcap::svg {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[i % 6];
}

constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 70;

inline std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
         "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

}  // namespace detail

struct Series {
  std::string name;
  std::vector<double> y;
};

/// Vertical bars; missing values (NaN) are drawn as an empty slot.
inline std::string bar_chart(const std::string& title, const std::vector<std::string>& labels, const std::vector<double>& values) {
  using namespace detail;
  double vmax = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  }
  if (vmax <= 0.0) vmax = 1.0;
  std::string s = header(title);
  const double pw = W - L - R, ph = H - T - B;
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(T + ph) + "\" x2=\"" + num(L + pw) + "\" y2=\"" + num(T + ph) + "\" stroke=\"black\"/>\n";
  const double slot = pw / std::max<std::size_t>(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = L + slot * i + 0.15 * slot;
    const double cx = L + slot * (i + 0.5);
    if (std::isfinite(values[i])) {
      const double h = ph * values[i] / vmax;
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(T + ph - h) + "\" width=\"" + num(0.7 * slot) + "\" height=\"" + num(h) +
           "\" fill=\"" + palette(i) + "\"/>\n";
      s += "<text x=\"" + num(cx) + "\" y=\"" + num(T + ph - h - 4) + "\" text-anchor=\"middle\">" + label(values[i]) + "</text>\n";
    } else {
      s += "<text x=\"" + num(cx) + "\" y=\"" + num(T + ph - 4) + "\" text-anchor=\"middle\">n/a</text>\n";
    }
    s += "<text x=\"" + num(cx) + "\" y=\"" + num(T + ph + 18) + "\" text-anchor=\"middle\">" + escape(labels[i]) + "</text>\n";
  }
  return s + "</svg>\n";
}

/// Polylines against the sample index (or xs when given).
inline std::string line_chart(const std::string& title, const std::vector<Series>& series, const std::vector<double>& xs = {},
                              bool log_y = false) {
  using namespace detail;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  std::size_t npts = 0;
  auto tr = [&](double v) { return log_y ? std::log10(std::max(std::abs(v), 1e-300)) : v; };
  for (const auto& sr : series) {
    npts = std::max(npts, sr.y.size());
    for (double v : sr.y) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, tr(v));
      ymax = std::max(ymax, tr(v));
    }
  }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  double xmin = 0.0, xmax = npts > 1 ? npts - 1.0 : 1.0;
  if (!xs.empty()) {
    xmin = *std::min_element(xs.begin(), xs.end());
    xmax = *std::max_element(xs.begin(), xs.end());
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  }
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](std::size_t i) { return L + pw * ((xs.empty() ? double(i) : xs[i]) - xmin) / (xmax - xmin); };
  auto py = [&](double v) { return T + ph * (1.0 - (tr(v) - ymin) / (ymax - ymin)); };
  std::string s = header(title);
  s += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(T + 4) + "\" text-anchor=\"end\">" + label(log_y ? std::pow(10.0, ymax) : ymax) + "</text>\n";
  s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(T + ph) + "\" text-anchor=\"end\">" + label(log_y ? std::pow(10.0, ymin) : ymin) + "</text>\n";
  s += "<text x=\"" + num(L) + "\" y=\"" + num(T + ph + 16) + "\" text-anchor=\"middle\">" + label(xmin) + "</text>\n";
  s += "<text x=\"" + num(L + pw) + "\" y=\"" + num(T + ph + 16) + "\" text-anchor=\"middle\">" + label(xmax) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      pts += num(px(i)) + "," + num(py(series[k].y[i])) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(palette(k)) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + num(L + 10) + "\" y=\"" + num(H - B + 36 + 14 * k) + "\" fill=\"" + palette(k) + "\">" + escape(series[k].name) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace convcap::svg
