/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "semsteer/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "semsteer/error.h"

namespace semsteer {
namespace {

std::string Fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderSvg(const std::vector<PlotSeries>& series,
                      const PlotOptions& opts) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DimensionError("plot series '" + s.label + "' has unequal x/y");
    }
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  if (opts.equal_aspect) sx = sy = std::min(sx, sy);
  auto px = [&](double x) { return left + (x - x0) * sx; };
  auto py = [&](double y) { return top + ph - (y - y0) * sy; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + Fmt(opts.width / 2.0) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         Escape(opts.title) + "</text>\n";
  out += "<rect x=\"" + Fmt(left) + "\" y=\"" + Fmt(top) + "\" width=\"" +
         Fmt(pw) + "\" height=\"" + Fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  // Axis ticks at the data extremes.
  out += "<text x=\"" + Fmt(left) + "\" y=\"" + Fmt(top + ph + 15) +
         "\" font-size=\"10\">" + Fmt(x0, 3) + "</text>\n";
  out += "<text x=\"" + Fmt(left + pw) + "\" y=\"" + Fmt(top + ph + 15) +
         "\" font-size=\"10\" text-anchor=\"end\">" + Fmt(x1, 3) + "</text>\n";
  out += "<text x=\"" + Fmt(left - 5) + "\" y=\"" + Fmt(top + ph) +
         "\" font-size=\"10\" text-anchor=\"end\">" + Fmt(y0, 3) + "</text>\n";
  out += "<text x=\"" + Fmt(left - 5) + "\" y=\"" + Fmt(top + 10) +
         "\" font-size=\"10\" text-anchor=\"end\">" + Fmt(y1, 3) + "</text>\n";
  out += "<text x=\"" + Fmt(left + pw / 2) + "\" y=\"" +
         Fmt(opts.height - 10.0) + "\" text-anchor=\"middle\" font-size=\"12\">" +
         Escape(opts.x_label) + "</text>\n";
  out += "<text x=\"15\" y=\"" + Fmt(top + ph / 2) +
         "\" font-size=\"12\" transform=\"rotate(-90 15 " + Fmt(top + ph / 2) +
         ")\" text-anchor=\"middle\">" + Escape(opts.y_label) + "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += Fmt(px(s.x[i])) + "," + Fmt(py(s.y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    for (size_t i : s.markers) {
      if (i >= s.x.size()) continue;
      out += "<circle cx=\"" + Fmt(px(s.x[i])) + "\" cy=\"" + Fmt(py(s.y[i])) +
             "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    }
    const double ly = top + 15 + 15 * static_cast<double>(k);
    out += "<line x1=\"" + Fmt(left + pw - 120) + "\" y1=\"" + Fmt(ly - 4) +
           "\" x2=\"" + Fmt(left + pw - 100) + "\" y2=\"" + Fmt(ly - 4) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + Fmt(left + pw - 95) + "\" y=\"" + Fmt(ly) +
           "\" font-size=\"11\">" + Escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace semsteer
