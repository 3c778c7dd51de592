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

// Reference implementations used only by tests. They favour plain loops over
// speed and share no code paths with the library kernels they check.

#ifndef DPGEN_TESTS_ORACLES_H_
#define DPGEN_TESTS_ORACLES_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpgen/analysis.h"
#include "dpgen/dataset.h"
#include "dpgen/mlp.h"
#include "dpgen/optim.h"
#include "dpgen/random.h"

namespace dpgen::testing {

// Output probabilities by direct evaluation of every layer.
std::vector<double> ScalarForward(const MlpParams& params,
                                  const std::vector<double>& x);

double ScalarLoss(const MlpParams& params, const std::vector<double>& x,
                  const std::vector<double>& target);

// Central differences of ScalarLoss with step h for every coordinate.
std::vector<double> FiniteDifferenceGradient(const MlpParams& params,
                                             const std::vector<double>& x,
                                             const std::vector<double>& target,
                                             double h);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, 1e-8).
double MaxRelativeError(std::span<const double> a, std::span<const double> b);

// sqrt of a left-to-right sum of squares.
double NaiveNorm(std::span<const double> v);

// Gaussian parameters (std `scale`) for a random architecture check.
MlpParams RandomParams(const Architecture& arch, RandomStream& stream,
                       double scale);

std::vector<double> RandomInput(int size, RandomStream& stream);

// params - eta * (1/N) * sum of dense per-example gradients over `data`.
MlpParams FullBatchGdStep(const MlpParams& params, const Dataset& data,
                          double eta);

// Balanced dataset of `n` records with uniform random bits.
Dataset RandomDataset(int n, int attr_count, RandomStream& stream);

// Runs `steps` DPSGD steps (eta 0.1, C 1, L = n = 10) on a network whose
// output is saturated on the correct class, so every per-example gradient is
// exactly zero, and returns every parameter increment of every step. The
// increments are pure noise with stddev 0.1 * sigma / 10. Lot sizes are
// appended to `lot_sizes` when it is non-null.
std::vector<double> SaturatedNoiseIncrements(double sigma, int steps,
                                             std::vector<int64_t>* lot_sizes);

// Checks the laws every alpha/beta curve over `diffs` must obey: beta
// nonincreasing, beta(1) = 0, each beta a multiple of 1/k, and each beta the
// smallest feasible value by direct recount. Returns "" or the first
// violation.
std::string CurveLawViolation(std::span<const CurvePoint> points,
                              std::span<const double> diffs);

}  // namespace dpgen::testing

#endif  // DPGEN_TESTS_ORACLES_H_
