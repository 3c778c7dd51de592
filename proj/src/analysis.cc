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

#include "dpgen/analysis.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "absl/strings/str_cat.h"
#include "dpgen/status_macros.h"
#include "fmt/format.h"

namespace dpgen {

FoldResult FoldResult::Make(int fold, double train_error, double full_error) {
  return FoldResult{fold, train_error, full_error,
                    std::fabs(train_error - full_error)};
}

double GeneralizationCurve::AlphaMax() const {
  for (const CurvePoint& point : points) {
    if (point.beta == 0.0) return point.alpha;
  }
  return 1.0;
}

absl::StatusOr<double> BetaForAlpha(std::span<const double> diffs,
                                    double alpha) {
  if (diffs.empty()) {
    return absl::InvalidArgumentError("no error gaps given");
  }
  std::size_t exceeding = 0;
  for (double diff : diffs) {
    if (!(diff >= 0.0 && diff <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("error gap outside [0, 1]: ", diff));
    }
    if (diff > alpha) ++exceeding;
  }
  return static_cast<double>(exceeding) / static_cast<double>(diffs.size());
}

absl::StatusOr<GeneralizationCurve> ComputeGeneralizationCurve(
    std::span<const double> diffs, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("grid step must lie in (0, 0.1], got ", grid_step));
  }
  GeneralizationCurve curve;
  curve.folds = static_cast<int>(diffs.size());
  const int intervals = static_cast<int>(std::ceil(1.0 / grid_step - 1e-9));
  // For steps like 0.001, i / 1000 is the correctly rounded grid value where
  // i * 0.001 is not.
  const double inverse = std::round(1.0 / grid_step);
  const bool exact = std::fabs(inverse * grid_step - 1.0) < 1e-12;
  for (int i = 0; i <= intervals; ++i) {
    const double alpha = i == intervals ? 1.0
                         : exact        ? i / inverse
                                        : i * grid_step;
    ASSIGN_OR_RETURN(const double beta, BetaForAlpha(diffs, alpha));
    curve.points.push_back({alpha, beta});
  }
  return curve;
}

absl::StatusOr<double> GapReduction(std::span<const double> sgd_diffs,
                                    std::span<const double> dpsgd_diffs) {
  if (sgd_diffs.empty() || dpsgd_diffs.empty()) {
    return absl::InvalidArgumentError("gap lists must be non-empty");
  }
  const double sgd_max = *std::max_element(sgd_diffs.begin(), sgd_diffs.end());
  const double dpsgd_max =
      *std::max_element(dpsgd_diffs.begin(), dpsgd_diffs.end());
  if (sgd_max == 0.0) {
    return absl::InvalidArgumentError(
        "gap reduction is undefined when every SGD gap is zero");
  }
  return 1.0 - dpsgd_max / sgd_max;
}

absl::StatusOr<std::optional<int>> ConvergenceEpoch(const TrainHistory& history,
                                                    ErrorSeries series,
                                                    double tol,
                                                    int min_plateau) {
  if (history.empty()) {
    return absl::InvalidArgumentError("empty training history");
  }
  if (!(tol > 0.0)) {
    return absl::InvalidArgumentError("tolerance must be positive");
  }
  const auto value = [&](std::size_t i) {
    return series == ErrorSeries::kTrain ? history[i].train_error
                                         : history[i].test_error;
  };
  // Walk backwards keeping the suffix minimum and maximum; the plateau entry
  // is the earliest index whose suffix spread is within tol.
  const std::size_t n = history.size();
  double suffix_min = value(n - 1);
  double suffix_max = value(n - 1);
  std::size_t entry = n - 1;
  for (std::size_t i = n; i-- > 0;) {
    suffix_min = std::min(suffix_min, value(i));
    suffix_max = std::max(suffix_max, value(i));
    if (suffix_max - suffix_min > tol) break;
    entry = i;
  }
  if (static_cast<int>(n - entry) < min_plateau) return std::nullopt;
  return history[entry].epoch;
}

absl::StatusOr<ConvergenceReport> AnalyzeConvergence(
    const TrainHistory& history, double tol) {
  ConvergenceReport report;
  ASSIGN_OR_RETURN(report.train_epoch,
                   ConvergenceEpoch(history, ErrorSeries::kTrain, tol));
  ASSIGN_OR_RETURN(report.test_epoch,
                   ConvergenceEpoch(history, ErrorSeries::kTest, tol));
  report.final_train_error = history.back().train_error;
  report.final_test_error = history.back().test_error;
  if (report.train_epoch && report.test_epoch && *report.test_epoch > 0) {
    report.epoch_ratio = static_cast<double>(*report.train_epoch) /
                         static_cast<double>(*report.test_epoch);
  }
  return report;
}

absl::Status WriteCurveCsv(const GeneralizationCurve& sgd,
                           const GeneralizationCurve& dpsgd,
                           const std::string& path) {
  if (sgd.points.size() != dpsgd.points.size()) {
    return absl::InvalidArgumentError("curves use different alpha grids");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << "alpha,beta_sgd,beta_dpsgd\n";
  for (std::size_t i = 0; i < sgd.points.size(); ++i) {
    out << fmt::format("{},{},{}\n", sgd.points[i].alpha, sgd.points[i].beta,
                       dpsgd.points[i].beta);
  }
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed for ", path));
  return absl::OkStatus();
}

}  // namespace dpgen
