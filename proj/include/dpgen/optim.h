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

// Training loops: minibatch SGD and differentially private SGD.
//
// A DPSGD step samples a lot by including every example independently with
// probability q = L / N, clips each per-example gradient g to
// g / max(1, ||g|| / C), sums the clipped gradients, adds one
// N(0, sigma^2 C^2 I) vector over the flat parameter vector, divides by the
// nominal lot size L and takes a step of size eta against the result.
//
// Random streams: for step t, lot membership comes from
// stream.Fork(kLotStream).Fork(t) and the noise from
// stream.Fork(kNoiseStream).Fork(t); SGD epoch e is shuffled with
// stream.Fork(kShuffleStream).Fork(e). Changing sigma therefore never changes
// which examples a step sees.

#ifndef DPGEN_OPTIM_H_
#define DPGEN_OPTIM_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/dataset.h"
#include "dpgen/mlp.h"
#include "dpgen/privacy.h"
#include "dpgen/random.h"

namespace dpgen {

enum class TrainMode { kSgd, kDpsgd };
enum class ExplosionPolicy { kAbort, kSkipStep };

inline constexpr uint32_t kInitStream = 1;
inline constexpr uint32_t kLotStream = 2;
inline constexpr uint32_t kNoiseStream = 3;
inline constexpr uint32_t kShuffleStream = 4;

struct TrainConfig {
  TrainMode mode = TrainMode::kDpsgd;
  double learning_rate = 0.1;
  int epochs = 150;
  // Lot size for DPSGD, minibatch size for SGD.
  int lot_size = 960;
  // Ignored by SGD.
  double noise_scale = 2.0;
  double clip_norm = 4.0;
  ExplosionPolicy explosion_policy = ExplosionPolicy::kAbort;
  // Error snapshots are taken every `eval_every` epochs and after the last.
  int eval_every = 1;

  absl::Status Validate() const;
};

struct StepRecord {
  int64_t step = 0;
  int64_t lot_size = 0;
  double preclip_min_norm = 0.0;
  double preclip_mean_norm = 0.0;
  double preclip_max_norm = 0.0;
  double clipped_fraction = 0.0;
  bool exploded = false;
};

struct Snapshot {
  int epoch = 0;
  double train_error = 0.0;
  double test_error = 0.0;
  int64_t lots = 0;
};

using TrainHistory = std::vector<Snapshot>;

// g / max(1, ||g|| / C). Gradients already within the bound are returned
// unchanged. A non-finite norm is an explosion error.
absl::StatusOr<Gradient> Clip(const Gradient& grad, double clip_norm);

// The divisor max(1, norm / C) used by Clip.
double ClipDivisor(double norm, double clip_norm);

// Indices in [0, n) included independently with probability q, ascending.
absl::StatusOr<std::vector<std::size_t>> SampleLot(std::size_t n, double q,
                                                   RandomStream& stream);

// Scratch buffers reused across steps.
class StepWorkspace {
 public:
  explicit StepWorkspace(const Architecture& arch);

 private:
  friend struct AveragedStep;

  Gradient sum_;
  std::vector<double> noise_;
  std::vector<double> features_;
  ForwardTrace trace_;
  ExampleGradient example_;
};

// The step kernel shared by SGD and DPSGD: sums the per-example gradients of
// `examples` in the given order, each divided by ClipDivisor(norm,
// clip_norm); adds N(0, noise_stddev^2) to every coordinate when
// noise_stddev > 0; divides by `divisor`; moves the parameters by
// -learning_rate times the result. On explosion `policy` decides between an
// error and an unchanged, flagged step.
struct AveragedStep {
  double clip_norm = std::numeric_limits<double>::infinity();
  double noise_stddev = 0.0;
  double divisor = 1.0;
  double learning_rate = 0.1;
  ExplosionPolicy policy = ExplosionPolicy::kAbort;

  absl::StatusOr<StepRecord> Apply(MlpParams* params, const Dataset& data,
                                   std::span<const std::size_t> examples,
                                   RandomStream* noise_stream,
                                   StepWorkspace* workspace) const;
};

// Streams consumed by one DPSGD step.
struct StepStreams {
  RandomStream lot;
  RandomStream noise;

  static StepStreams ForStep(const RandomStream& root, int64_t step);
};

// One step of noisy clipped SGD on `data` with q = lot_size / |data|.
absl::StatusOr<StepRecord> DpsgdStep(MlpParams* params, const Dataset& data,
                                     const TrainConfig& config,
                                     StepStreams& streams, int64_t step,
                                     StepWorkspace* workspace);

// params -= eta * mean gradient over `batch`. No clipping, no noise.
absl::StatusOr<StepRecord> SgdStep(MlpParams* params, const Dataset& data,
                                   std::span<const std::size_t> batch,
                                   const TrainConfig& config, int64_t step,
                                   StepWorkspace* workspace);

struct TrainResult {
  MlpParams params;
  TrainHistory history;
  std::vector<StepRecord> steps;
  // DPSGD runs record one event; SGD runs leave it empty.
  std::vector<PrivacyEvent> privacy_events;
};

// Number of steps per epoch: ceil(N / L) for both modes.
int64_t StepsPerEpoch(std::size_t n, int lot_size);

// Initializes parameters from stream.Fork(kInitStream), then TrainFrom.
absl::StatusOr<TrainResult> Train(const Dataset& train, const Dataset& test,
                                  const TrainConfig& config,
                                  const Architecture& arch,
                                  const RandomStream& stream);

absl::StatusOr<TrainResult> TrainFrom(MlpParams initial, const Dataset& train,
                                      const Dataset& test,
                                      const TrainConfig& config,
                                      const RandomStream& stream);

// step,lot_size,preclip_mean_norm,clipped_frac,exploded
absl::Status WriteStepLogCsv(std::span<const StepRecord> steps,
                             const std::string& path);

}  // namespace dpgen

#endif  // DPGEN_OPTIM_H_
