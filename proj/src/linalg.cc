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

#include "dpgen/linalg.h"

#include <cmath>

namespace dpgen {

double L2Norm(std::span<const double> v) { return std::sqrt(SquaredNorm(v)); }

void Scale(double alpha, std::span<double> v) {
  for (double& value : v) value *= alpha;
}

bool AllFinite(std::span<const double> v) {
  for (double value : v) {
    if (!std::isfinite(value)) return false;
  }
  return true;
}

}  // namespace dpgen
