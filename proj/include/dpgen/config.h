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

// Experiment configuration.
//
// Files are flat "key = value" lines; '#' starts a comment. Every key has a
// fixed type and unit in the schema (see ConfigSchema) and unknown keys are
// rejected. Keys not present keep the value of the base configuration the
// file is applied to.

#ifndef DPGEN_CONFIG_H_
#define DPGEN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpgen/dataset.h"
#include "dpgen/optim.h"

namespace dpgen {

enum class RunScale { kDesk, kPaper };

struct ConvergenceConfig {
  int64_t n_train = 1000;
  int64_t n_test = 1000;
  int epochs = 1000;
  int eval_every = 10;
  int sgd_lot_size = 960;
  int dpsgd_lot_size = 960;
  std::vector<double> sigmas = {1.0, 4.0, 8.5, 9.5};
};

struct ExperimentConfig {
  uint64_t seed = 7;
  SyntheticSpec data;
  int folds = 10;
  TrainConfig sgd;
  // noise_scale is taken from `sigmas`, one run per entry.
  TrainConfig dpsgd;
  // Empty runs the SGD arm only.
  std::vector<double> sigmas = {2.0, 4.0, 8.0, 40.0};
  ConvergenceConfig convergence;
  double delta = 1e-5;
  double alpha_step = 0.001;
  double plateau_tol = 0.01;
  // 0 picks the hardware concurrency.
  int threads = 0;
  bool write_step_logs = true;
  bool write_checkpoints = true;

  // Defaults for the given scale.
  static ExperimentConfig ForScale(RunScale scale);

  absl::Status Validate() const;

  // One "key = value" line per schema key, in schema order. Doubles are
  // written in shortest round-trip form, so Parse(Serialize()) is exact.
  std::string Serialize() const;

  // 64-bit FNV-1a of Serialize(), as 16 hex digits.
  std::string Hash() const;
};

absl::StatusOr<RunScale> ParseScale(absl::string_view text);

// Applies the assignments in `text` on top of `base`, then validates.
absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text,
                                             const ExperimentConfig& base);

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path,
                                            const ExperimentConfig& base);

// Comma-separated list of non-negative reals, e.g. "2,4,8.5".
absl::StatusOr<std::vector<double>> ParseSigmaList(absl::string_view text);

struct ConfigKey {
  std::string name;
  std::string type;
  std::string unit;
};

// Every accepted key with its type and unit, in serialization order.
const std::vector<ConfigKey>& ConfigSchema();

}  // namespace dpgen

#endif  // DPGEN_CONFIG_H_
