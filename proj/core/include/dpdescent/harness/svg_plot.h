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

#ifndef DPDESCENT_HARNESS_SVG_PLOT_H_
#define DPDESCENT_HARNESS_SVG_PLOT_H_

#include <string>
#include <vector>

namespace dpdescent::harness {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LogLogPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

// Standalone SVG document. Points with a non-positive or non-finite
// coordinate are dropped. Output depends only on the input.
std::string RenderSvg(const LogLogPlot& plot);

// Keeps at most max_points points, evenly spaced in log t, always keeping
// the first and last.
std::vector<std::size_t> LogSpacedIndices(std::size_t n,
                                          std::size_t max_points = 400);

}  // namespace dpdescent::harness

#endif  // DPDESCENT_HARNESS_SVG_PLOT_H_
