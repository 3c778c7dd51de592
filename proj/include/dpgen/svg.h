//
// Copyright 2026 The dpgen Authors.
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
//

#ifndef DPGEN_SVG_H_
#define DPGEN_SVG_H_

#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpgen {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Line chart with the Y axis fixed to [0, 1].
struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

// Self-contained SVG text. Identical input gives identical bytes. Fails if
// there are no series, a series has no points, or a value is not finite.
absl::StatusOr<std::string> RenderSvg(const LinePlot& plot);

absl::Status WriteSvg(const LinePlot& plot, const std::string& path);

}  // namespace dpgen

#endif  // DPGEN_SVG_H_
