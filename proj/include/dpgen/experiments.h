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

// Experiment drivers behind the command-line subcommands.
//
// Stream layout under the master seed: Fork(1) generates the k-fold dataset,
// Fork(2).Fork(f) drives fold f, Fork(3) generates the convergence dataset and
// Fork(4) drives the convergence runs. Within a run stream, Fork(1) seeds the
// shared initial parameters, Fork(10) the SGD arm and Fork(20) every DPSGD
// arm, so arms that differ only in sigma see the same lots.

#ifndef DPGEN_EXPERIMENTS_H_
#define DPGEN_EXPERIMENTS_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/analysis.h"
#include "dpgen/config.h"
#include "dpgen/dataset.h"
#include "dpgen/manifest.h"
#include "dpgen/optim.h"

namespace dpgen {

inline constexpr uint32_t kFoldDataStream = 1;
inline constexpr uint32_t kFoldRunStream = 2;
inline constexpr uint32_t kConvergenceDataStream = 3;
inline constexpr uint32_t kConvergenceRunStream = 4;
inline constexpr uint32_t kSgdArmStream = 10;
inline constexpr uint32_t kDpsgdArmStream = 20;

// "2", "8.5", "0.25": the sigma as it appears in file names.
std::string SigmaTag(double sigma);

// Runs `count` jobs on up to `threads` workers (0 means hardware
// concurrency). Returns the error of the lowest-numbered failing job.
absl::Status RunParallel(int count, int threads,
                         const std::function<absl::Status(int)>& job);

// The dataset used by the overfitting experiment.
absl::StatusOr<Dataset> GenerateFoldData(const ExperimentConfig& config);

// Writes data.csv and folds.csv (record,fold) into the manifest directory.
absl::Status RunGenData(const ExperimentConfig& config, RunManifest* manifest);

struct OverfitSigmaResult {
  double sigma = 0.0;
  std::vector<FoldResult> dpsgd;
  GeneralizationCurve sgd_curve;
  GeneralizationCurve dpsgd_curve;
  int64_t exploded_steps = 0;
};

struct OverfitResult {
  std::vector<FoldResult> sgd;
  std::vector<OverfitSigmaResult> per_sigma;
};

// Trains SGD once per fold and DPSGD once per (fold, sigma); both arms of a
// fold start from the same parameters. Every fold is evaluated on the whole
// dataset. Writes per sigma table_sigma_<s>.csv, curve_sigma_<s>.csv and
// curve_sigma_<s>.svg, plus step logs when enabled.
absl::StatusOr<OverfitResult> RunOverfit(const ExperimentConfig& config,
                                         RunManifest* manifest);

struct ConvergenceArm {
  double sigma = 0.0;
  TrainHistory history;
  ConvergenceReport report;
};

struct ConvergenceResult {
  ConvergenceArm sgd;
  std::vector<ConvergenceArm> dpsgd;
};

// Trains on the first n_train records, tests on the next n_test. Histories
// start with an epoch-0 snapshot of the shared initial parameters. Writes per
// sigma convergence_sigma_<s>.csv (accuracies) and .svg, plus
// convergence_report.csv and checkpoints when enabled.
absl::StatusOr<ConvergenceResult> RunConvergence(const ExperimentConfig& config,
                                                 RunManifest* manifest);

struct AccountantRow {
  double sigma = 0.0;
  double q = 0.0;
  int64_t steps = 0;
  std::optional<EventBudget> budget;
  // Why budget is missing.
  std::string error;
};

// Budget for each sigma at the given sampling rate and step count.
std::vector<AccountantRow> RunAccountant(const std::vector<double>& sigmas,
                                         double q, int64_t steps, double delta);

// sigma,q,steps,eps_step,eps_amplified,eps_total,delta_total with
// "out_of_regime" in the epsilon columns of rows without a budget.
std::string FormatAccountantTable(const std::vector<AccountantRow>& rows);

// Renders a curve CSV (alpha,...) or a convergence CSV (epoch,...) as SVG.
absl::Status PlotCsv(const std::string& input, const std::string& output);

}  // namespace dpgen

#endif  // DPGEN_EXPERIMENTS_H_
