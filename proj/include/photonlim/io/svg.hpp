/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "csv.hpp"

namespace photonlim::io {

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string z_label; ///< heatmap colour bar
  bool log_x = false;
};

struct LineSeries {
  std::string name;
  std::vector<double> x, y;
};

namespace detail {
inline constexpr double kWidth = 720, kHeight = 440;
inline constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

inline std::string esc(const std::string &s) {
  std::string o;
  for (char c : s) {
    switch (c) {
    case '&': o += "&amp;"; break;
    case '<': o += "&lt;"; break;
    case '>': o += "&gt;"; break;
    case '"': o += "&quot;"; break;
    default: o += c;
    }
  }
  return o;
}

/// Coordinates are written with two decimals so output is byte-stable.
inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

struct Axis {
  double lo, hi;
  bool log;
  double a, b; ///< pixel range
  double map(double v) const {
    const double f = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return a + f * (b - a);
  }
  std::vector<double> ticks() const {
    if (!log) return nice_ticks(lo, hi);
    std::vector<double> t;
    for (double e = std::ceil(std::log10(lo) - 1e-12); e <= std::log10(hi) + 1e-12; e += 1.0)
      t.push_back(std::pow(10.0, e));
    if (t.size() < 2) t = {lo, hi};
    return t;
  }
};

inline std::pair<double, double> padded_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    return {lo - d, hi + d};
  }
  return {lo, hi};
}

inline void frame(std::string &s, const PlotSpec &spec, const Axis &x, const Axis &y) {
  s += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(kWidth - kLeft - kRight) +
       "\" height=\"" + px(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double t : x.ticks()) {
    const double X = x.map(t);
    s += "<line x1=\"" + px(X) + "\" y1=\"" + px(kHeight - kBottom) + "\" x2=\"" + px(X) + "\" y2=\"" +
         px(kHeight - kBottom + 5) + "\" stroke=\"#000\"/>\n";
    s += "<text x=\"" + px(X) + "\" y=\"" + px(kHeight - kBottom + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + format_number(t) + "</text>\n";
  }
  for (double t : y.ticks()) {
    const double Y = y.map(t);
    s += "<line x1=\"" + px(kLeft - 5) + "\" y1=\"" + px(Y) + "\" x2=\"" + px(kLeft) + "\" y2=\"" + px(Y) +
         "\" stroke=\"#000\"/>\n";
    s += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(Y + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_number(t) + "</text>\n";
  }
  s += "<text x=\"" + px((kLeft + kWidth - kRight) / 2) + "\" y=\"" + px(kHeight - 15) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + esc(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + px((kTop + kHeight - kBottom) / 2) + "\" text-anchor=\"middle\" font-size=\"13\" " +
       "transform=\"rotate(-90 18 " + px((kTop + kHeight - kBottom) / 2) + ")\">" + esc(spec.y_label) + "</text>\n";
  s += "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + esc(spec.title) +
       "</text>\n";
}

inline std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
         "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
}

/// Piecewise-linear viridis approximation on [0, 1].
inline std::string viridis(double f) {
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                           {94, 201, 98}, {253, 231, 37}}};
  f = std::clamp(std::isfinite(f) ? f : 0.0, 0.0, 1.0) * 4.0;
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(f), 3);
  const double u = f - static_cast<double>(i);
  char buf[16];
  int c[3];
  for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + u * (stops[i + 1][k] - stops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}
} // namespace detail

inline std::string render_line_plot(const PlotSpec &spec, const std::vector<LineSeries> &series) {
  using namespace detail;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto &s : series) {
    if (s.x.size() != s.y.size()) throw SchemaError("series '" + s.name + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_x && !(s.x[i] > 0.0))) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) throw SchemaError("nothing to plot");
  if (spec.log_x && !(xhi > xlo)) xhi = xlo * 10.0;
  std::tie(xlo, xhi) = padded_range(xlo, xhi);
  std::tie(ylo, yhi) = padded_range(ylo, yhi);
  const Axis x{xlo, xhi, spec.log_x, kLeft, kWidth - kRight};
  const Axis y{ylo, yhi, false, kHeight - kBottom, kTop};
  static const std::array<const char *, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::string s = header();
  frame(s, spec, x, y);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char *col = palette[k % palette.size()];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      const double xv = series[k].x[i], yv = series[k].y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv) || (spec.log_x && !(xv > 0.0))) continue;
      if (!first) s += ' ';
      s += px(x.map(xv)) + "," + px(y.map(yv));
      first = false;
    }
    s += "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + px(kWidth - kRight + 12) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(kWidth - kRight + 34) +
         "\" y2=\"" + px(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + px(kWidth - kRight + 40) + "\" y=\"" + px(ly + 4) + "\" font-size=\"12\">" +
         esc(series[k].name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

/// z[iy][ix] over the grid xs × ys, drawn as cells centred on the samples.
inline std::string render_heatmap(const PlotSpec &spec, const std::vector<double> &xs, const std::vector<double> &ys,
                                  const std::vector<std::vector<double>> &z) {
  using namespace detail;
  if (xs.empty() || ys.empty()) throw SchemaError("heatmap needs a nonempty grid");
  if (z.size() != ys.size()) throw SchemaError("heatmap rows do not match y samples");
  double zlo = INFINITY, zhi = -INFINITY;
  for (const auto &row : z) {
    if (row.size() != xs.size()) throw SchemaError("heatmap columns do not match x samples");
    for (double v : row)
      if (std::isfinite(v)) {
        zlo = std::min(zlo, v);
        zhi = std::max(zhi, v);
      }
  }
  if (!std::isfinite(zlo)) throw SchemaError("heatmap has no finite values");
  auto edges = [](const std::vector<double> &v) {
    std::vector<double> e(v.size() + 1);
    if (v.size() == 1) return std::vector<double>{v[0] - 0.5, v[0] + 0.5};
    e.front() = v[0] - 0.5 * (v[1] - v[0]);
    e.back() = v.back() + 0.5 * (v.back() - v[v.size() - 2]);
    for (std::size_t i = 1; i < v.size(); ++i) e[i] = 0.5 * (v[i - 1] + v[i]);
    return e;
  };
  const auto ex = edges(xs), ey = edges(ys);
  const Axis x{ex.front(), ex.back(), false, kLeft, kWidth - kRight};
  const Axis y{ey.front(), ey.back(), false, kHeight - kBottom, kTop};
  const double span = zhi > zlo ? zhi - zlo : 1.0;
  std::string s = header();
  for (std::size_t iy = 0; iy < ys.size(); ++iy)
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const double x0 = x.map(ex[ix]), x1 = x.map(ex[ix + 1]);
      const double y0 = y.map(ey[iy + 1]), y1 = y.map(ey[iy]);
      s += "<rect x=\"" + px(x0) + "\" y=\"" + px(y0) + "\" width=\"" + px(x1 - x0) + "\" height=\"" + px(y1 - y0) +
           "\" fill=\"" + viridis((z[iy][ix] - zlo) / span) + "\"/>\n";
    }
  frame(s, spec, x, y);
  const double bx = kWidth - kRight + 30, bh = kHeight - kTop - kBottom;
  for (int k = 0; k < 50; ++k) {
    const double f = (k + 0.5) / 50.0;
    s += "<rect x=\"" + px(bx) + "\" y=\"" + px(kTop + bh * (1.0 - (k + 1) / 50.0)) + "\" width=\"20\" height=\"" +
         px(bh / 50.0 + 0.5) + "\" fill=\"" + viridis(f) + "\"/>\n";
  }
  s += "<text x=\"" + px(bx + 26) + "\" y=\"" + px(kTop + 8) + "\" font-size=\"11\">" + format_number(zhi) + "</text>\n";
  s += "<text x=\"" + px(bx + 26) + "\" y=\"" + px(kTop + bh) + "\" font-size=\"11\">" + format_number(zlo) + "</text>\n";
  s += "<text x=\"" + px(bx) + "\" y=\"" + px(kTop - 8) + "\" font-size=\"12\">" + esc(spec.z_label) + "</text>\n";
  s += "</svg>\n";
  return s;
}

/// One line per y column against a shared x column.
inline std::string line_plot_from_table(const Table &t, const std::string &x_col,
                                        const std::vector<std::string> &y_cols, PlotSpec spec) {
  if (t.rows.empty()) throw SchemaError("CSV has no data rows");
  if (y_cols.empty()) throw SchemaError("no y columns requested");
  const auto x = t.values(x_col);
  std::vector<LineSeries> series;
  for (const auto &c : y_cols) series.push_back({c, x, t.values(c)});
  if (spec.x_label.empty()) spec.x_label = x_col;
  return render_line_plot(spec, series);
}

/// Heatmap from long-format rows (x, y, z); every grid cell must be present once.
inline std::string heatmap_from_table(const Table &t, const std::string &x_col, const std::string &y_col,
                                      const std::string &z_col, PlotSpec spec) {
  if (t.rows.empty()) throw SchemaError("CSV has no data rows");
  const auto xv = t.values(x_col), yv = t.values(y_col), zv = t.values(z_col);
  std::map<double, std::size_t> xi, yi;
  for (double v : xv) xi.emplace(v, 0);
  for (double v : yv) yi.emplace(v, 0);
  std::vector<double> xs, ys;
  for (auto &[v, i] : xi) { i = xs.size(); xs.push_back(v); }
  for (auto &[v, i] : yi) { i = ys.size(); ys.push_back(v); }
  std::vector<std::vector<double>> z(ys.size(), std::vector<double>(xs.size(), NAN));
  std::vector<std::vector<bool>> seen(ys.size(), std::vector<bool>(xs.size(), false));
  for (std::size_t r = 0; r < xv.size(); ++r) {
    const std::size_t a = xi[xv[r]], b = yi[yv[r]];
    if (seen[b][a]) throw SchemaError("duplicate heatmap cell");
    seen[b][a] = true;
    z[b][a] = zv[r];
  }
  for (const auto &row : seen)
    for (bool b : row)
      if (!b) throw SchemaError("heatmap grid is incomplete");
  if (spec.x_label.empty()) spec.x_label = x_col;
  if (spec.y_label.empty()) spec.y_label = y_col;
  if (spec.z_label.empty()) spec.z_label = z_col;
  return render_heatmap(spec, xs, ys, z);
}

} // namespace photonlim::io
