#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace msmpolicy::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr int kTicks = 5;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      xr.add(s.x[k]);
      yr.add(s.mean[k]);
      yr.add(s.lower[k]);
      yr.add(s.upper[k]);
    }
  }
  xr.finish();
  yr.finish();
  const double pad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= pad;
  yr.hi += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";

  // Axes and ticks.
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kTop + plot_h) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = xr.lo + (xr.hi - xr.lo) * t / kTicks;
    const double yv = yr.lo + (yr.hi - yr.lo) * t / kTicks;
    out << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(px(xv))
        << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h + 20) << "\" text-anchor=\"middle\">"
        << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(py(yv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
        << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num(kTop + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "</g>\n";

  for (const auto& s : series) {
    if (s.x.empty()) continue;
    out << "<polygon fill=\"" << escape(s.color) << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) out << num(px(s.x[k])) << ',' << num(py(s.upper[k])) << ' ';
    for (std::size_t k = s.x.size(); k-- > 0;) {
      out << num(px(s.x[k])) << ',' << num(py(s.lower[k])) << (k == 0 ? "" : " ");
    }
    out << "\"/>\n";
  }
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out << num(px(s.x[k])) << ',' << num(py(s.mean[k])) << (k + 1 == s.x.size() ? "" : " ");
    }
    out << "\"><title>" << escape(s.name) << "</title></polyline>\n";
  }

  out << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 10 + 22.0 * static_cast<double>(k);
    const double x = kWidth - kRight + 20;
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 6) << "\" width=\"24\" height=\"12\" fill=\""
        << escape(series[k].color) << "\" fill-opacity=\"0.4\" stroke=\"" << escape(series[k].color) << "\"/>\n";
    out << "<text x=\"" << num(x + 32) << "\" y=\"" << num(y + 4) << "\">" << escape(series[k].name) << "</text>\n";
  }
  out << "</g>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace msmpolicy::cli
