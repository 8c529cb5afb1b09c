#include "kppfront/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace kpp::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-300) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

} // namespace

std::string plot(const Axes& axes, const std::vector<Series>& series) {
  auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!axes.log_x || x > 0) && (!axes.log_y || y > 0);
  };
  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) {
        rx.add(tx(s.x[i]));
        ry.add(ty(s.y[i]));
      }
  rx.pad();
  ry.pad();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(axes.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = rx.lo + t * (rx.hi - rx.lo) / 4, fy = ry.lo + t * (ry.hi - ry.lo) / 4;
    const double X = kLeft + t * pw / 4, Y = kTop + ph - t * ph / 4;
    os << "<text x=\"" << X << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
       << fmt(axes.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
       << fmt(axes.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(axes.xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(axes.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i]))
        os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
        if (usable(s.x[i], s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
             << color << "\"/>\n";
    const double ly = kTop + 14 + 18 * k;
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << kWidth - kRight + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly << "\">" << escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const CylinderGrid& grid,
                    const std::vector<double>& values) {
  Range r;
  for (double v : values)
    if (std::isfinite(v))
      r.add(v);
  r.pad();
  const int M = grid.axial_intervals(), N = grid.cross().intervals();
  const int cols = std::min(M + 1, 400), rows = std::min(N + 1, 100);
  const double pw = kWidth - kLeft - 90, ph = kHeight - kTop - kBottom;
  const double cw = pw / cols, ch = ph / rows;
  auto ramp = [](double s) {
    // Dark blue through teal to yellow.
    const double r = std::clamp(-0.1 + 1.2 * s * s, 0.0, 1.0);
    const double g = std::clamp(0.05 + 0.85 * s, 0.0, 1.0);
    const double b = std::clamp(0.35 + 0.6 * std::sin(3.14159 * s) - 0.3 * s, 0.0, 1.0);
    std::ostringstream os;
    os << "rgb(" << static_cast<int>(255 * r) << ',' << static_cast<int>(255 * g) << ','
       << static_cast<int>(255 * b) << ')';
    return os.str();
  };
  std::ostringstream os;
  os.precision(5);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  for (int a = 0; a < cols; ++a) {
    const int i = static_cast<int>(std::lround(static_cast<double>(a) * M / std::max(1, cols - 1)));
    for (int b = 0; b < rows; ++b) {
      const int j = static_cast<int>(std::lround(static_cast<double>(b) * N / std::max(1, rows - 1)));
      const double v = values[grid.index(i, j)];
      const double s = std::isfinite(v) ? (v - r.lo) / (r.hi - r.lo) : 0.0;
      os << "<rect x=\"" << kLeft + a * cw << "\" y=\"" << kTop + ph - (b + 1) * ch
         << "\" width=\"" << cw + 0.3 << "\" height=\"" << ch + 0.3 << "\" fill=\"" << ramp(s)
         << "\"/>\n";
    }
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << kTop + ph + 16 << "\">" << fmt(grid.x(0))
     << "</text>\n";
  os << "<text x=\"" << kLeft + pw << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"end\">"
     << fmt(grid.x(M)) << "</text>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">x</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">0</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">"
     << fmt(grid.cross().length()) << "</text>\n";
  for (int t = 0; t <= 10; ++t) {
    const double s = t / 10.0;
    os << "<rect x=\"" << kWidth - 60 << "\" y=\"" << kTop + ph - (t + 1) * ph / 11
       << "\" width=\"16\" height=\"" << ph / 11 + 0.3 << "\" fill=\"" << ramp(s) << "\"/>\n";
  }
  os << "<text x=\"" << kWidth - 40 << "\" y=\"" << kTop + ph << "\">" << fmt(r.lo) << "</text>\n";
  os << "<text x=\"" << kWidth - 40 << "\" y=\"" << kTop + 12 << "\">" << fmt(r.hi) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

} // namespace kpp::svg
