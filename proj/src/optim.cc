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

#include "dpgen/optim.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dpgen/errors.h"
#include "dpgen/linalg.h"
#include "dpgen/status_macros.h"
#include "fmt/format.h"

namespace dpgen {

absl::Status TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (epochs < 0) {
    return absl::InvalidArgumentError("epochs must be non-negative");
  }
  if (lot_size <= 0) {
    return absl::InvalidArgumentError("lot size must be positive");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    return absl::InvalidArgumentError("noise scale must be non-negative");
  }
  if (!(clip_norm > 0.0)) {
    return absl::InvalidArgumentError("clip norm must be positive");
  }
  if (eval_every <= 0) {
    return absl::InvalidArgumentError("eval_every must be positive");
  }
  return absl::OkStatus();
}

double ClipDivisor(double norm, double clip_norm) {
  return std::max(1.0, norm / clip_norm);
}

absl::StatusOr<Gradient> Clip(const Gradient& grad, double clip_norm) {
  if (!(clip_norm > 0.0)) {
    return absl::InvalidArgumentError("clip norm must be positive");
  }
  const double norm = L2Norm(grad.flat());
  if (!std::isfinite(norm)) {
    return ExplosionError("gradient norm is not finite");
  }
  Gradient out = grad;
  const double divisor = ClipDivisor(norm, clip_norm);
  if (divisor > 1.0) {
    for (double& value : out.flat()) value /= divisor;
  }
  return out;
}

absl::StatusOr<std::vector<std::size_t>> SampleLot(std::size_t n, double q,
                                                   RandomStream& stream) {
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling probability must lie in (0, 1], got ", q));
  }
  std::vector<std::size_t> lot;
  lot.reserve(static_cast<std::size_t>(q * static_cast<double>(n) * 1.2) + 8);
  for (std::size_t i = 0; i < n; ++i) {
    if (stream.NextUniform() < q) lot.push_back(i);
  }
  return lot;
}

StepWorkspace::StepWorkspace(const Architecture& arch)
    : sum_(arch), features_(arch.input_size()) {}

absl::StatusOr<StepRecord> AveragedStep::Apply(
    MlpParams* params, const Dataset& data,
    std::span<const std::size_t> examples, RandomStream* noise_stream,
    StepWorkspace* workspace) const {
  StepRecord record;
  record.lot_size = static_cast<int64_t>(examples.size());
  Gradient& sum = workspace->sum_;
  sum.SetZero();

  const int outputs = params->architecture().output_size();
  std::vector<double> target(outputs, 0.0);
  double norm_total = 0.0;
  double norm_min = std::numeric_limits<double>::infinity();
  double norm_max = 0.0;
  std::size_t clipped = 0;
  absl::Status failure;
  for (std::size_t i : examples) {
    data.Features(i, workspace->features_);
    std::fill(target.begin(), target.end(), 0.0);
    target[data.class_index(i)] = 1.0;
    failure = ComputeExampleGradient(*params, workspace->features_, target,
                                     &workspace->trace_, &workspace->example_);
    if (!failure.ok()) break;
    const double norm = std::sqrt(workspace->example_.SquaredNorm());
    const double divisor = ClipDivisor(norm, clip_norm);
    assert(norm / divisor <= clip_norm * (1.0 + 1e-12));
    if (divisor > 1.0) ++clipped;
    norm_total += norm;
    norm_min = std::min(norm_min, norm);
    norm_max = std::max(norm_max, norm);
    workspace->example_.AddScaledTo(1.0 / divisor, &sum);
  }
  if (!examples.empty()) {
    const double count = static_cast<double>(examples.size());
    record.preclip_min_norm = norm_min;
    record.preclip_mean_norm = norm_total / count;
    record.preclip_max_norm = norm_max;
    record.clipped_fraction = static_cast<double>(clipped) / count;
  }

  if (failure.ok() && noise_stddev > 0.0) {
    std::vector<double>& noise = workspace->noise_;
    noise.resize(sum.flat().size());
    RETURN_IF_ERROR(noise_stream->FillGaussian(noise, 0.0, noise_stddev));
    Axpy(1.0, noise, sum.flat());
  }
  if (failure.ok() && !AllFinite(sum.flat())) {
    failure = ExplosionError("non-finite aggregated gradient");
  }

  if (failure.ok()) {
    // Stage the update so that an explosion leaves the parameters untouched.
    std::span<double> update = sum.flat();
    const std::span<const double> current = params->flat();
    for (std::size_t k = 0; k < update.size(); ++k) {
      update[k] = current[k] - learning_rate * (update[k] / divisor);
    }
    if (!AllFinite(update)) {
      failure = ExplosionError("non-finite parameters after update");
    } else {
      std::copy(update.begin(), update.end(), params->flat().begin());
    }
  }

  if (!failure.ok()) {
    if (!IsExplosion(failure) || policy == ExplosionPolicy::kAbort) {
      return failure;
    }
    record.exploded = true;
  }
  return record;
}

StepStreams StepStreams::ForStep(const RandomStream& root, int64_t step) {
  const auto label = static_cast<uint32_t>(step);
  return StepStreams{root.Fork(kLotStream).Fork(label),
                     root.Fork(kNoiseStream).Fork(label)};
}

absl::StatusOr<StepRecord> DpsgdStep(MlpParams* params, const Dataset& data,
                                     const TrainConfig& config,
                                     StepStreams& streams, int64_t step,
                                     StepWorkspace* workspace) {
  if (config.mode != TrainMode::kDpsgd) {
    return absl::InvalidArgumentError("DpsgdStep needs a DPSGD config");
  }
  RETURN_IF_ERROR(config.Validate());
  if (data.empty() ||
      static_cast<std::size_t>(config.lot_size) > data.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lot size ", config.lot_size, " exceeds dataset size ", data.size()));
  }
  const double q =
      static_cast<double>(config.lot_size) / static_cast<double>(data.size());
  ASSIGN_OR_RETURN(std::vector<std::size_t> lot,
                   SampleLot(data.size(), q, streams.lot));
  AveragedStep kernel;
  kernel.clip_norm = config.clip_norm;
  kernel.noise_stddev =
      config.noise_scale > 0.0 ? config.noise_scale * config.clip_norm : 0.0;
  kernel.divisor = static_cast<double>(config.lot_size);
  kernel.learning_rate = config.learning_rate;
  kernel.policy = config.explosion_policy;
  absl::StatusOr<StepRecord> record =
      kernel.Apply(params, data, lot, &streams.noise, workspace);
  if (!record.ok()) {
    return absl::Status(record.status().code(),
                        absl::StrCat("DPSGD step ", step, ": ",
                                     record.status().message()));
  }
  record->step = step;
  return record;
}

absl::StatusOr<StepRecord> SgdStep(MlpParams* params, const Dataset& data,
                                   std::span<const std::size_t> batch,
                                   const TrainConfig& config, int64_t step,
                                   StepWorkspace* workspace) {
  if (config.mode != TrainMode::kSgd) {
    return absl::InvalidArgumentError("SgdStep needs an SGD config");
  }
  if (batch.empty()) {
    return absl::InvalidArgumentError("SGD batch must not be empty");
  }
  AveragedStep kernel;
  kernel.divisor = static_cast<double>(batch.size());
  kernel.learning_rate = config.learning_rate;
  kernel.policy = config.explosion_policy;
  absl::StatusOr<StepRecord> record =
      kernel.Apply(params, data, batch, nullptr, workspace);
  if (!record.ok()) {
    return absl::Status(record.status().code(),
                        absl::StrCat("SGD step ", step, ": ",
                                     record.status().message()));
  }
  record->step = step;
  return record;
}

int64_t StepsPerEpoch(std::size_t n, int lot_size) {
  return static_cast<int64_t>((n + lot_size - 1) / lot_size);
}

absl::StatusOr<TrainResult> Train(const Dataset& train, const Dataset& test,
                                  const TrainConfig& config,
                                  const Architecture& arch,
                                  const RandomStream& stream) {
  RandomStream init_stream = stream.Fork(kInitStream);
  return TrainFrom(InitParams(arch, init_stream), train, test, config, stream);
}

absl::StatusOr<TrainResult> TrainFrom(MlpParams initial, const Dataset& train,
                                      const Dataset& test,
                                      const TrainConfig& config,
                                      const RandomStream& stream) {
  RETURN_IF_ERROR(config.Validate());
  if (train.empty() || test.empty()) {
    return absl::InvalidArgumentError("train and test sets must be non-empty");
  }
  if (static_cast<std::size_t>(config.lot_size) > train.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lot size ", config.lot_size, " exceeds training set size ",
        train.size()));
  }

  TrainResult result{std::move(initial), {}, {}, {}};
  StepWorkspace workspace(result.params.architecture());
  const int64_t steps_per_epoch = StepsPerEpoch(train.size(), config.lot_size);
  std::vector<std::size_t> order(train.size());
  int64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.mode == TrainMode::kSgd) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      RandomStream shuffle =
          stream.Fork(kShuffleStream).Fork(static_cast<uint32_t>(epoch));
      shuffle.Shuffle(order);
      for (std::size_t begin = 0; begin < order.size();
           begin += config.lot_size) {
        const std::size_t end =
            std::min(order.size(), begin + static_cast<std::size_t>(
                                               config.lot_size));
        const std::span<const std::size_t> batch(order.data() + begin,
                                                 end - begin);
        ASSIGN_OR_RETURN(
            StepRecord record,
            SgdStep(&result.params, train, batch, config, step, &workspace));
        result.steps.push_back(record);
        ++step;
      }
    } else {
      for (int64_t s = 0; s < steps_per_epoch; ++s) {
        StepStreams streams = StepStreams::ForStep(stream, step);
        ASSIGN_OR_RETURN(StepRecord record,
                         DpsgdStep(&result.params, train, config, streams,
                                   step, &workspace));
        result.steps.push_back(record);
        ++step;
      }
    }

    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      Snapshot snapshot;
      snapshot.epoch = epoch;
      snapshot.lots = step;
      ASSIGN_OR_RETURN(snapshot.train_error, ErrorRate(result.params, train));
      ASSIGN_OR_RETURN(snapshot.test_error, ErrorRate(result.params, test));
      result.history.push_back(snapshot);
    }
  }

  if (config.mode == TrainMode::kDpsgd && step > 0 &&
      config.noise_scale > 0.0) {
    result.privacy_events.push_back(PrivacyEvent{
        config.noise_scale,
        static_cast<double>(config.lot_size) /
            static_cast<double>(train.size()),
        step});
  }
  return result;
}

absl::Status WriteStepLogCsv(std::span<const StepRecord> steps,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << "step,lot_size,preclip_mean_norm,clipped_frac,exploded\n";
  for (const StepRecord& record : steps) {
    out << fmt::format("{},{},{},{},{}\n", record.step, record.lot_size,
                       record.preclip_mean_norm, record.clipped_fraction,
                       record.exploded ? 1 : 0);
  }
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed for ", path));
  return absl::OkStatus();
}

}  // namespace dpgen
