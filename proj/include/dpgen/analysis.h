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

// Generalization measurements over per-fold training results.
//
// A learner is (alpha, beta)-generalizing when the gap between its empirical
// and true error exceeds alpha with probability at most beta. Over k folds
// the smallest such beta for a given alpha is the fraction of fold gaps
// strictly greater than alpha.

#ifndef DPGEN_ANALYSIS_H_
#define DPGEN_ANALYSIS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/optim.h"

namespace dpgen {

struct FoldResult {
  int fold = 0;
  double train_error = 0.0;
  // Error over every fold, standing in for the true error.
  double full_error = 0.0;
  double diff = 0.0;

  static FoldResult Make(int fold, double train_error, double full_error);
};

struct CurvePoint {
  double alpha = 0.0;
  double beta = 0.0;
};

struct GeneralizationCurve {
  std::vector<CurvePoint> points;
  int folds = 0;

  // Smallest grid alpha with beta == 0.
  double AlphaMax() const;
};

absl::StatusOr<double> BetaForAlpha(std::span<const double> diffs,
                                    double alpha);

// Samples alpha = i * grid_step for i = 0, 1, ... up to 1 (the last point is
// exactly 1). Requires 0 < grid_step <= 0.1.
absl::StatusOr<GeneralizationCurve> ComputeGeneralizationCurve(
    std::span<const double> diffs, double grid_step);

// 1 - max(dpsgd_diffs) / max(sgd_diffs).
absl::StatusOr<double> GapReduction(std::span<const double> sgd_diffs,
                                    std::span<const double> dpsgd_diffs);

enum class ErrorSeries { kTrain, kTest };

// Plateau entry: the first snapshot from which the series never leaves
// [m, m + tol], m being the minimum over that snapshot and all later ones.
// A plateau must span at least `min_plateau` snapshots; a series that only
// settles on its last snapshot(s) has not converged and yields nullopt.
absl::StatusOr<std::optional<int>> ConvergenceEpoch(const TrainHistory& history,
                                                    ErrorSeries series,
                                                    double tol,
                                                    int min_plateau = 2);

struct ConvergenceReport {
  std::optional<int> train_epoch;
  std::optional<int> test_epoch;
  double final_train_error = 0.0;
  double final_test_error = 0.0;
  // train_epoch / test_epoch when both converged.
  std::optional<double> epoch_ratio;
};

absl::StatusOr<ConvergenceReport> AnalyzeConvergence(
    const TrainHistory& history, double tol);

// alpha,beta_sgd,beta_dpsgd. Both curves must share the same alpha grid.
absl::Status WriteCurveCsv(const GeneralizationCurve& sgd,
                           const GeneralizationCurve& dpsgd,
                           const std::string& path);

}  // namespace dpgen

#endif  // DPGEN_ANALYSIS_H_
