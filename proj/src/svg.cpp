#include "fmlmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace fmlmc {

namespace {

constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;

const char* const kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                "#66ccee", "#aa3377", "#bbbbbb", "#222222"};
constexpr int kPaletteSize = 8;

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string coord(double v) { return fmt(v, "%.2f"); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisRange {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double place(double v, double pixel_lo, double pixel_hi) const {
    double t;
    if (log)
      t = (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    else
      t = (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

AxisRange fit_range(double lo, double hi, bool log) {
  AxisRange r;
  r.log = log;
  if (!(lo <= hi)) {  // no data at all
    lo = log ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (log) {
    r.lo = std::pow(10.0, std::floor(std::log10(lo)));
    r.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (r.lo == r.hi) r.hi *= 10.0;
  } else {
    if (lo == hi) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
    const double pad = (hi - lo) * 0.05;
    r.lo = lo - pad;
    r.hi = hi + pad;
    if (r.lo > 0.0 && r.lo < 0.3 * (r.hi - r.lo)) r.lo = 0.0;
  }
  return r;
}

std::vector<double> axis_ticks(const AxisRange& r) {
  std::vector<double> ticks;
  if (r.log) {
    const int lo_e = static_cast<int>(std::llround(std::log10(r.lo)));
    const int hi_e = static_cast<int>(std::llround(std::log10(r.hi)));
    int stride = 1;
    while ((hi_e - lo_e) / stride > 9) ++stride;
    for (int e = lo_e; e <= hi_e; e += stride) ticks.push_back(std::pow(10.0, e));
    return ticks;
  }
  const double range = r.hi - r.lo;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  const double first = std::ceil(r.lo / step) * step;
  for (double v = first; v <= r.hi + 0.5 * step; v += step) ticks.push_back(v == 0.0 ? 0.0 : v);
  return ticks;
}

std::string tick_label(double v, bool log) {
  if (log) {
    const int e = static_cast<int>(std::llround(std::log10(v)));
    if (e >= -2 && e <= 3) return fmt(v, "%g");
    return "1e" + fmt(static_cast<double>(e), "%.0f");
  }
  return fmt(v, "%g");
}

struct Frame {
  double x0, x1, y0, y1;  // pixel bounds of the plotting area (y0 = top)
};

void open_svg(std::string& svg, const PlotOptions& o) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(o.width, "%.0f") +
         "\" height=\"" + fmt(o.height, "%.0f") + "\" viewBox=\"0 0 " + fmt(o.width, "%.0f") +
         " " + fmt(o.height, "%.0f") + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!o.title.empty())
    svg += "<text x=\"" + coord(o.width / 2.0) +
           "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\" "
           "fill=\"#222222\">" +
           escape(o.title) + "</text>\n";
}

void draw_axes(std::string& svg, const PlotOptions& o, const Frame& f, const AxisRange& xr,
               const AxisRange& yr, bool numeric_x) {
  if (numeric_x) {
    for (double t : axis_ticks(xr)) {
      if (t < xr.lo || t > xr.hi) continue;
      const double px = xr.place(t, f.x0, f.x1);
      svg += "<line x1=\"" + coord(px) + "\" y1=\"" + coord(f.y0) + "\" x2=\"" + coord(px) +
             "\" y2=\"" + coord(f.y1) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
      svg += "<text x=\"" + coord(px) + "\" y=\"" + coord(f.y1 + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
             "fill=\"#444444\">" +
             tick_label(t, xr.log) + "</text>\n";
    }
  }
  for (double t : axis_ticks(yr)) {
    if (t < yr.lo || t > yr.hi) continue;
    const double py = yr.place(t, f.y1, f.y0);
    svg += "<line x1=\"" + coord(f.x0) + "\" y1=\"" + coord(py) + "\" x2=\"" + coord(f.x1) +
           "\" y2=\"" + coord(py) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + coord(f.x0 - 6) + "\" y=\"" + coord(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#444444\">" +
           tick_label(t, yr.log) + "</text>\n";
  }
  svg += "<rect x=\"" + coord(f.x0) + "\" y=\"" + coord(f.y0) + "\" width=\"" +
         coord(f.x1 - f.x0) + "\" height=\"" + coord(f.y1 - f.y0) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  if (!o.x_label.empty())
    svg += "<text x=\"" + coord((f.x0 + f.x1) / 2.0) + "\" y=\"" +
           coord(f.y1 + 40) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">" +
           escape(o.x_label) + "</text>\n";
  if (!o.y_label.empty())
    svg += "<text x=\"18\" y=\"" + coord((f.y0 + f.y1) / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\" transform=\"rotate(-90 18 " +
           coord((f.y0 + f.y1) / 2.0) + ")\">" + escape(o.y_label) + "</text>\n";
}

void draw_legend(std::string& svg, const Frame& f, const std::vector<std::string>& labels) {
  const double x = f.x1 - 160;
  double y = f.y0 + 16;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(y - 4) + "\" x2=\"" + coord(x + 22) +
           "\" y2=\"" + coord(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2.5\"/>\n";
    svg += "<text x=\"" + coord(x + 28) + "\" y=\"" + coord(y) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">" +
           escape(labels[s]) + "</text>\n";
    y += 16;
  }
}

}  // namespace

std::string line_plot_svg(const PlotOptions& o, const std::vector<PlotSeries>& series) {
  const Frame f{static_cast<double>(kMarginLeft), static_cast<double>(o.width - kMarginRight),
                static_cast<double>(kMarginTop), static_cast<double>(o.height - kMarginBottom)};

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = s.x[i], y = s.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (o.log_x && x <= 0.0) continue;
      if (o.log_y && y <= 0.0) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  const AxisRange xr = fit_range(xmin, xmax, o.log_x);
  const AxisRange yr = fit_range(ymin, ymax, o.log_y);

  std::string svg;
  open_svg(svg, o);
  draw_axes(svg, o, f, xr, yr, true);
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < series.size(); ++s) {
    labels.push_back(series[s].label);
    const char* color = kPalette[s % kPaletteSize];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double x = series[s].x[i], y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((o.log_x && x <= 0.0) || (o.log_y && y <= 0.0)) continue;
      points += coord(xr.place(x, f.x0, f.x1)) + "," + coord(yr.place(y, f.y1, f.y0)) + " ";
    }
    if (!points.empty())
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
  }
  draw_legend(svg, f, labels);
  svg += "</svg>\n";
  return svg;
}

std::string bar_chart_svg(const PlotOptions& o, const std::vector<std::string>& series_labels,
                          const std::vector<BarGroup>& groups) {
  const Frame f{static_cast<double>(kMarginLeft), static_cast<double>(o.width - kMarginRight),
                static_cast<double>(kMarginTop), static_cast<double>(o.height - kMarginBottom)};

  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& g : groups)
    for (double v : g.values) {
      if (!std::isfinite(v) || (o.log_y && v <= 0.0)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  const AxisRange yr = fit_range(ymin, ymax, o.log_y);
  const double floor_px = o.log_y ? yr.place(yr.lo, f.y1, f.y0) : yr.place(std::max(0.0, yr.lo), f.y1, f.y0);

  std::string svg;
  open_svg(svg, o);
  draw_axes(svg, o, f, AxisRange{}, yr, false);

  const std::size_t bars = series_labels.size();
  const double group_w = (f.x1 - f.x0) / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(bars);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = f.x0 + group_w * (static_cast<double>(g) + 0.1);
    for (std::size_t s = 0; s < bars && s < groups[g].values.size(); ++s) {
      const double v = groups[g].values[s];
      if (!std::isfinite(v) || (o.log_y && v <= 0.0)) continue;
      const double top = yr.place(std::min(std::max(v, yr.lo), yr.hi), f.y1, f.y0);
      const double x = gx + bar_w * static_cast<double>(s);
      svg += "<rect x=\"" + coord(x) + "\" y=\"" + coord(std::min(top, floor_px)) + "\" width=\"" +
             coord(bar_w * 0.92) + "\" height=\"" + coord(std::abs(floor_px - top)) +
             "\" fill=\"" + kPalette[s % kPaletteSize] + "\"/>\n";
    }
    svg += "<text x=\"" + coord(gx + group_w * 0.4) + "\" y=\"" + coord(f.y1 + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#444444\">" +
           escape(groups[g].label) + "</text>\n";
  }
  draw_legend(svg, f, series_labels);
  svg += "</svg>\n";
  return svg;
}

std::string heatmap_svg(const PlotOptions& o, int nx, int ny, const std::vector<double>& values,
                        bool log_scale) {
  const Frame f{static_cast<double>(kMarginLeft), static_cast<double>(o.width - kMarginRight),
                static_cast<double>(kMarginTop), static_cast<double>(o.height - kMarginBottom)};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log_scale && v <= 0.0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {
    lo = log_scale ? 1e-12 : 0.0;
    hi = 1.0;
  }
  const double tlo = log_scale ? std::log10(lo) : lo;
  const double thi = log_scale ? std::log10(hi) : hi;

  std::string svg;
  open_svg(svg, o);
  const double cw = (f.x1 - f.x0) / nx;
  const double ch = (f.y1 - f.y0) / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double v = values[static_cast<std::size_t>(j) * nx + i];
      double t = 0.0;
      if (std::isfinite(v) && !(log_scale && v <= 0.0)) {
        const double tv = log_scale ? std::log10(v) : v;
        t = thi > tlo ? (tv - tlo) / (thi - tlo) : 0.5;
      }
      // dark blue (low) to warm yellow (high)
      const int r = static_cast<int>(std::lround(30 + t * (253 - 30)));
      const int g = static_cast<int>(std::lround(40 + t * (231 - 40)));
      const int b = static_cast<int>(std::lround(90 + t * (37 - 90)));
      char color[12];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", r, g, b);
      // row 0 at the bottom, matching the grid's cell indexing
      const double x = f.x0 + cw * i;
      const double y = f.y1 - ch * (j + 1);
      svg += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" width=\"" + coord(cw + 0.5) +
             "\" height=\"" + coord(ch + 0.5) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  svg += "<rect x=\"" + coord(f.x0) + "\" y=\"" + coord(f.y0) + "\" width=\"" +
         coord(f.x1 - f.x0) + "\" height=\"" + coord(f.y1 - f.y0) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  if (!o.x_label.empty())
    svg += "<text x=\"" + coord((f.x0 + f.x1) / 2.0) + "\" y=\"" + coord(f.y1 + 24) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">" +
           escape(o.x_label) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace fmlmc
