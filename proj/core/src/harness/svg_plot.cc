// Copyright 2026 The dpdescent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpdescent/harness/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dpdescent::harness {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

bool Usable(double x, double y) {
  return std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double log_v) {
    lo = std::min(lo, log_v);
    hi = std::max(hi, log_v);
  }
  // Whole decades, at least one wide.
  void Snap() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (hi <= lo) hi = lo + 1.0;
  }
};

}  // namespace

std::vector<std::size_t> LogSpacedIndices(std::size_t n,
                                          std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  if (n <= max_points || max_points < 2) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  const double top = std::log(static_cast<double>(n));
  for (std::size_t k = 0; k < max_points; ++k) {
    const double t = std::exp(top * static_cast<double>(k) /
                              static_cast<double>(max_points - 1));
    auto i = static_cast<std::size_t>(std::llround(t)) - 1;
    i = std::min(i, n - 1);
    if (idx.empty() || i > idx.back()) idx.push_back(i);
  }
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

std::string RenderSvg(const LogLogPlot& plot) {
  Range xr;
  Range yr;
  for (const PlotSeries& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!Usable(s.x[i], s.y[i])) continue;
      xr.Add(std::log10(s.x[i]));
      yr.Add(std::log10(s.y[i]));
    }
  }
  xr.Snap();
  yr.Snap();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) {
    return kLeft + (std::log10(v) - xr.lo) / (xr.hi - xr.lo) * pw;
  };
  auto py = [&](double v) {
    return kTop + ph - (std::log10(v) - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
         "\" height=\"" + Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) +
         " " + Num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Num(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" +
         Escape(plot.title) + "</text>\n";

  // Decade grid and tick labels.
  for (double e = xr.lo; e <= xr.hi; e += 1.0) {
    const double x = kLeft + (e - xr.lo) / (xr.hi - xr.lo) * pw;
    svg += "<line x1=\"" + Num(x) + "\" y1=\"" + Num(kTop) + "\" x2=\"" +
           Num(x) + "\" y2=\"" + Num(kTop + ph) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + Num(x) + "\" y=\"" + Num(kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  for (double e = yr.lo; e <= yr.hi; e += 1.0) {
    const double y = kTop + ph - (e - yr.lo) / (yr.hi - yr.lo) * ph;
    svg += "<line x1=\"" + Num(kLeft) + "\" y1=\"" + Num(y) + "\" x2=\"" +
           Num(kLeft + pw) + "\" y2=\"" + Num(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + Num(kLeft - 6) + "\" y=\"" + Num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  svg += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" +
         Num(pw) + "\" height=\"" + Num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + Num(kLeft + pw / 2) + "\" y=\"" + Num(kHeight - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         Escape(plot.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + Num(kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 18 " +
         Num(kTop + ph / 2) + ")\">" + Escape(plot.y_label) + "</text>\n";

  double legend_y = kTop + 14;
  for (const PlotSeries& s : plot.series) {
    std::string points;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!Usable(s.x[i], s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += Num(px(s.x[i])) + "," + Num(py(s.y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + Escape(s.color) +
           "\" stroke-width=\"1.5\"" +
           (s.dashed ? std::string(" stroke-dasharray=\"5,3\"") : "") +
           " points=\"" + points + "\"/>\n";
    if (!s.label.empty()) {
      svg += "<text x=\"" + Num(kLeft + pw - 8) + "\" y=\"" + Num(legend_y) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\" fill=\"" +
             Escape(s.color) + "\">" + Escape(s.label) + "</text>\n";
      legend_y += 14;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dpdescent::harness
