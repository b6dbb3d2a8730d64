#include "medix/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace medix {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  // Widens degenerate or empty ranges so the affine map below is well defined.
  void finalize() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
  const double width = 640, height = 480;
  const double ml = 64, mr = 16, mt = 36, mb = 48;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;

  Range xr, yr;
  for (const SvgSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y))
        throw std::invalid_argument("non-finite plot point");
      xr.absorb(x);
      yr.absorb(y);
    }
  xr.finalize();
  yr.finalize();

  const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return mt + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  f << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n";

  // Axes box and ticks.
  f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
    << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / ticks;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / ticks;
    const double gx = px(fx), gy = py(fy);
    f << "<line x1=\"" << gx << "\" y1=\"" << mt + ph << "\" x2=\"" << gx << "\" y2=\""
      << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << gx << "\" y=\"" << mt + ph + 18
      << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    f << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\""
      << gy << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
      << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  f << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">"
    << escape(y_label) << "</text>\n";

  for (const SvgSeries& s : series) {
    if (s.line && s.points.size() > 1) {
      f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : s.points) f << num(px(x)) << ',' << num(py(y)) << ' ';
      f << "\"/>\n";
    }
    if (!s.line) {
      for (const auto& [x, y] : s.points)
        f << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\""
          << s.radius << "\" fill=\"" << s.color << "\" fill-opacity=\"0.75\"/>\n";
    }
  }

  // Legend, top-right inside the plot box.
  double ly = mt + 16;
  for (const SvgSeries& s : series) {
    if (s.label.empty()) continue;
    const double lx = ml + pw - 150;
    f << "<circle cx=\"" << lx << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << s.color
      << "\"/>\n";
    f << "<text x=\"" << lx + 10 << "\" y=\"" << ly << "\">" << escape(s.label)
      << "</text>\n";
    ly += 18;
  }
  f << "</svg>\n";
}

}  // namespace medix
