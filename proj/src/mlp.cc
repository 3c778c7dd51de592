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

#include "dpgen/mlp.h"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpgen/errors.h"
#include "dpgen/status_macros.h"

namespace dpgen {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

// ---------------------------------------------------------------------------
// Architecture

Architecture::Architecture(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  offsets_.push_back(0);
  for (int k = 0; k < num_layers(); ++k) {
    offsets_.push_back(offsets_.back() +
                       static_cast<std::size_t>(fan_in(k)) * fan_out(k) +
                       fan_out(k));
  }
}

absl::StatusOr<Architecture> Architecture::Create(
    std::vector<int> layer_sizes) {
  if (layer_sizes.size() < 3) {
    return absl::InvalidArgumentError(
        "architecture needs an input, at least one hidden and an output layer");
  }
  for (int size : layer_sizes) {
    if (size <= 0) {
      return absl::InvalidArgumentError("layer widths must be positive");
    }
  }
  if (layer_sizes.back() < 2) {
    return absl::InvalidArgumentError("output layer needs at least 2 units");
  }
  return Architecture(std::move(layer_sizes));
}

Architecture Architecture::Default() { return Architecture({200, 128, 16, 2}); }

std::string Architecture::DebugString() const {
  return absl::StrJoin(sizes_, "-");
}

// ---------------------------------------------------------------------------
// ParameterVector

ParameterVector::ParameterVector(Architecture arch)
    : arch_(std::move(arch)), values_(arch_.parameter_count(), 0.0) {}

ParameterVector::ParameterVector(Architecture arch, std::vector<double> values)
    : arch_(std::move(arch)), values_(std::move(values)) {
  assert(values_.size() == arch_.parameter_count());
}

absl::Status ParameterVector::CheckFlatSize(const Architecture& arch,
                                            std::size_t size) {
  if (size != arch.parameter_count()) {
    return absl::InvalidArgumentError(
        absl::StrCat("flat vector has ", size, " entries; architecture ",
                     arch.DebugString(), " needs ", arch.parameter_count()));
  }
  return absl::OkStatus();
}

std::span<double> ParameterVector::weights(int layer) {
  return std::span<double>(values_).subspan(
      arch_.weight_offset(layer),
      static_cast<std::size_t>(arch_.fan_in(layer)) * arch_.fan_out(layer));
}

std::span<const double> ParameterVector::weights(int layer) const {
  return std::span<const double>(values_).subspan(
      arch_.weight_offset(layer),
      static_cast<std::size_t>(arch_.fan_in(layer)) * arch_.fan_out(layer));
}

std::span<double> ParameterVector::weights_from(int layer, int input) {
  const std::size_t fan_out = arch_.fan_out(layer);
  return weights(layer).subspan(input * fan_out, fan_out);
}

std::span<const double> ParameterVector::weights_from(int layer,
                                                      int input) const {
  const std::size_t fan_out = arch_.fan_out(layer);
  return weights(layer).subspan(input * fan_out, fan_out);
}

MatrixView<double> ParameterVector::weight_matrix(int layer) {
  return MatrixView<double>(weights(layer).data(), arch_.fan_out(layer),
                            arch_.fan_in(layer), 1, arch_.fan_out(layer));
}

MatrixView<const double> ParameterVector::weight_matrix(int layer) const {
  return MatrixView<const double>(weights(layer).data(), arch_.fan_out(layer),
                                  arch_.fan_in(layer), 1,
                                  arch_.fan_out(layer));
}

std::span<double> ParameterVector::biases(int layer) {
  return std::span<double>(values_).subspan(arch_.bias_offset(layer),
                                            arch_.fan_out(layer));
}

std::span<const double> ParameterVector::biases(int layer) const {
  return std::span<const double>(values_).subspan(arch_.bias_offset(layer),
                                                  arch_.fan_out(layer));
}

void ParameterVector::SetZero() { std::fill(values_.begin(), values_.end(), 0.0); }

absl::StatusOr<MlpParams> MlpParams::FromFlat(Architecture arch,
                                              std::vector<double> values) {
  RETURN_IF_ERROR(CheckFlatSize(arch, values.size()));
  return MlpParams(std::move(arch), std::move(values));
}

absl::StatusOr<Gradient> Gradient::FromFlat(Architecture arch,
                                            std::vector<double> values) {
  RETURN_IF_ERROR(CheckFlatSize(arch, values.size()));
  return Gradient(std::move(arch), std::move(values));
}

MlpParams InitParams(const Architecture& arch, RandomStream& stream) {
  MlpParams params(arch);
  for (int k = 0; k < arch.num_layers(); ++k) {
    const double stddev = std::sqrt(2.0 / arch.fan_in(k));
    // stddev is positive, so this cannot fail.
    stream.FillGaussian(params.weights(k), 0.0, stddev).IgnoreError();
  }
  return params;
}

// ---------------------------------------------------------------------------
// Forward pass and loss

void Softmax(std::span<const double> logits, std::span<double> out) {
  assert(logits.size() == out.size());
  double max_logit = logits[0];
  for (double z : logits) max_logit = std::max(max_logit, z);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    total += out[i];
  }
  for (double& value : out) value /= total;
}

Vector Softmax(std::span<const double> logits) {
  Vector out(logits.size());
  Softmax(logits, out);
  return out;
}

absl::Status Forward(const MlpParams& params, std::span<const double> x,
                     ForwardTrace* trace) {
  const Architecture& arch = params.architecture();
  if (x.size() != static_cast<std::size_t>(arch.input_size())) {
    return absl::InvalidArgumentError(
        absl::StrCat("input has ", x.size(), " features, network expects ",
                     arch.input_size()));
  }
  const int layers = arch.num_layers();
  trace->pre_activations.resize(layers);
  trace->activations.resize(layers);
  std::span<const double> input = x;
  for (int k = 0; k < layers; ++k) {
    Vector& z = trace->pre_activations[k];
    const std::span<const double> bias = params.biases(k);
    z.assign(bias.begin(), bias.end());
    for (std::size_t j = 0; j < input.size(); ++j) {
      // Binary features and ReLU outputs are frequently exactly zero.
      if (input[j] == 0.0) continue;
      Axpy(input[j], params.weights_from(k, static_cast<int>(j)), z);
    }
    if (!AllFinite(z)) return OverflowError(k + 1);

    Vector& y = trace->activations[k];
    y.resize(z.size());
    if (k + 1 < layers) {
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] > 0.0 ? z[i] : 0.0;
    } else {
      Softmax(z, y);
    }
    input = y;
  }
  return absl::OkStatus();
}

absl::StatusOr<ForwardTrace> Forward(const MlpParams& params,
                                     std::span<const double> x) {
  ForwardTrace trace;
  RETURN_IF_ERROR(Forward(params, x, &trace));
  return trace;
}

double CrossEntropyLoss(std::span<const double> probs,
                        std::span<const double> target) {
  assert(probs.size() == target.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (target[k] == 0.0) continue;
    loss -= target[k] * std::log(std::max(probs[k], kLogFloor));
  }
  return loss;
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

Vector OneHot(int index, int size) {
  Vector out(size, 0.0);
  out[index] = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Backpropagation

double ExampleGradient::SquaredNorm() const {
  double total = 0.0;
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    total += dpgen::SquaredNorm(deltas_[k]) *
             (dpgen::SquaredNorm(inputs_[k]) + 1.0);
  }
  return total;
}

void ExampleGradient::AddScaledTo(double scale, ParameterVector* sum) const {
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    const int layer = static_cast<int>(k);
    const Vector& delta = deltas_[k];
    const Vector& input = inputs_[k];
    for (std::size_t j = 0; j < input.size(); ++j) {
      if (input[j] == 0.0) continue;
      Axpy(scale * input[j], delta, sum->weights_from(layer, static_cast<int>(j)));
    }
    Axpy(scale, delta, sum->biases(layer));
  }
}

void ExampleGradient::MaterializeTo(ParameterVector* out) const {
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    const int layer = static_cast<int>(k);
    const Vector& delta = deltas_[k];
    const Vector& input = inputs_[k];
    for (std::size_t j = 0; j < input.size(); ++j) {
      std::span<double> column = out->weights_from(layer, static_cast<int>(j));
      for (std::size_t i = 0; i < delta.size(); ++i) {
        column[i] = delta[i] * input[j];
      }
    }
    std::copy(delta.begin(), delta.end(), out->biases(layer).begin());
  }
}

absl::Status ComputeExampleGradient(const MlpParams& params,
                                    std::span<const double> x,
                                    std::span<const double> target,
                                    ForwardTrace* trace, ExampleGradient* out) {
  const Architecture& arch = params.architecture();
  if (target.size() != static_cast<std::size_t>(arch.output_size())) {
    return absl::InvalidArgumentError("target size does not match output");
  }
  RETURN_IF_ERROR(Forward(params, x, trace));
  const int layers = arch.num_layers();
  out->inputs_.resize(layers);
  out->deltas_.resize(layers);
  out->inputs_[0].assign(x.begin(), x.end());
  for (int k = 1; k < layers; ++k) {
    out->inputs_[k] = trace->activations[k - 1];
  }

  const std::span<const double> probs = trace->probs();
  out->loss_ = CrossEntropyLoss(probs, target);
  Vector& output_delta = out->deltas_[layers - 1];
  output_delta.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    output_delta[i] = probs[i] - target[i];
  }
  for (int k = layers - 1; k > 0; --k) {
    const Vector& delta = out->deltas_[k];
    const Vector& z_below = trace->pre_activations[k - 1];
    Vector& delta_below = out->deltas_[k - 1];
    delta_below.resize(z_below.size());
    for (std::size_t j = 0; j < z_below.size(); ++j) {
      delta_below[j] =
          z_below[j] > 0.0
              ? Dot(params.weights_from(k, static_cast<int>(j)), delta)
              : 0.0;
    }
  }
  if (!std::isfinite(out->SquaredNorm())) {
    return ExplosionError("non-finite per-example gradient");
  }
  return absl::OkStatus();
}

absl::StatusOr<LossAndGradient> PerExampleGradient(
    const MlpParams& params, std::span<const double> x,
    std::span<const double> target) {
  ForwardTrace trace;
  ExampleGradient factored;
  RETURN_IF_ERROR(ComputeExampleGradient(params, x, target, &trace, &factored));
  Gradient grad(params.architecture());
  factored.MaterializeTo(&grad);
  if (!AllFinite(grad.flat())) {
    return ExplosionError("non-finite per-example gradient");
  }
  return LossAndGradient{factored.loss(), std::move(grad)};
}

absl::StatusOr<double> ErrorRate(const MlpParams& params,
                                 const Dataset& records) {
  if (records.empty()) {
    return absl::InvalidArgumentError("error rate of an empty record set");
  }
  if (records.attr_count() != params.architecture().input_size()) {
    return absl::InvalidArgumentError("record width does not match network");
  }
  ForwardTrace trace;
  Vector x(records.attr_count());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records.Features(i, x);
    RETURN_IF_ERROR(Forward(params, x, &trace));
    if (ArgMax(trace.probs()) != records.class_index(i)) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'P', 'G', 'N', 'M', 'L', 'P', '1'};

template <typename T>
void WritePod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool ReadPod(std::ifstream& in, T* value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(value), sizeof(T)));
}

}  // namespace

absl::Status WriteCheckpoint(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::vector<int>& sizes = params.architecture().layer_sizes();
  WritePod(out, static_cast<uint32_t>(sizes.size()));
  for (int size : sizes) WritePod(out, static_cast<uint32_t>(size));
  const std::span<const double> flat = params.flat();
  WritePod(out, static_cast<uint64_t>(flat.size()));
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed for ", path));
  return absl::OkStatus();
}

absl::StatusOr<MlpParams> ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": not a parameter checkpoint"));
  }
  uint32_t count = 0;
  if (!ReadPod(in, &count) || count > 64) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": bad layer count"));
  }
  std::vector<int> sizes(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t size = 0;
    if (!ReadPod(in, &size)) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": truncated"));
    }
    sizes[i] = static_cast<int>(size);
  }
  ASSIGN_OR_RETURN(Architecture arch, Architecture::Create(std::move(sizes)));
  uint64_t length = 0;
  if (!ReadPod(in, &length) || length != arch.parameter_count()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": parameter count does not match layer widths"));
  }
  std::vector<double> values(length);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(length * sizeof(double)))) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": truncated"));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": trailing bytes after parameters"));
  }
  return MlpParams::FromFlat(std::move(arch), std::move(values));
}

}  // namespace dpgen
