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

#ifndef SEMSTEER_PLOT_H_
#define SEMSTEER_PLOT_H_

#include <string>
#include <vector>

namespace semsteer {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  // Draws markers at these point indices (e.g. waypoint resets).
  std::vector<size_t> markers;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 480;
  // Same scale on both axes (trajectories).
  bool equal_aspect = false;
};

// Polyline chart with a frame, min/max tick labels and a legend. Coordinates
// are printed with fixed precision so identical data give identical bytes.
std::string RenderSvg(const std::vector<PlotSeries>& series,
                      const PlotOptions& opts);

}  // namespace semsteer

#endif  // SEMSTEER_PLOT_H_
