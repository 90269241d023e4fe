#pragma once

// Minimal SVG line and bar plots for report data.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace svg {

struct Series {
  std::string label;
  std::vector<double> y;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

inline void frame(std::ofstream& out, const std::string& title, double lo, double hi) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n"
      << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
      << "<rect x=\"60\" y=\"40\" width=\"540\" height=\"300\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << esc(title)
      << "</text>\n"
      << "<text x=\"55\" y=\"44\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(hi)
      << "</text>\n"
      << "<text x=\"55\" y=\"340\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(lo)
      << "</text>\n";
}

inline void line_plot(const std::filesystem::path& path, const std::string& title, const std::vector<double>& x,
                      const std::vector<Series>& series) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (hi == lo) hi = lo + 1.0;
  const double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
  std::ofstream out(path);
  frame(out, title, lo, hi);
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << "<polyline fill=\"none\" stroke=\"" << colours[k % 4] << "\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      const double px = 60.0 + 540.0 * (x[i] - x0) / (x1 - x0);
      const double py = 340.0 - 300.0 * (series[k].y[i] - lo) / (hi - lo);
      out << num(px) << ',' << num(py) << ' ';
    }
    out << "\"/>\n<text x=\"70\" y=\"" << 58 + 14 * k << "\" fill=\"" << colours[k % 4]
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(series[k].label) << "</text>\n";
  }
  out << "</svg>\n";
}

/// One bar per audit: margin / max(tolerance, |rhs|), red when failing.
inline void margin_plot(const std::filesystem::path& path, const std::vector<std::string>& names,
                        const std::vector<double>& scaled, const std::vector<bool>& pass) {
  double lo = 0.0, hi = 0.0;
  for (double v : scaled)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi == lo) hi = lo + 1.0;
  std::ofstream out(path);
  frame(out, "audit margins (relative)", lo, hi);
  const double w = names.empty() ? 0.0 : 540.0 / names.size();
  const double zero = 340.0 - 300.0 * (0.0 - lo) / (hi - lo);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double v = std::isfinite(scaled[i]) ? scaled[i] : 0.0;
    const double py = 340.0 - 300.0 * (v - lo) / (hi - lo);
    out << "<rect x=\"" << num(60.0 + i * w + 0.1 * w) << "\" y=\"" << num(std::min(py, zero)) << "\" width=\""
        << num(0.8 * w) << "\" height=\"" << num(std::abs(zero - py)) << "\" fill=\""
        << (pass[i] ? "#2ca02c" : "#d62728") << "\"><title>" << esc(names[i]) << "</title></rect>\n";
  }
  out << "</svg>\n";
}

}  // namespace svg
