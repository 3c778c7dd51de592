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

// Fully connected ReLU network with a softmax output layer and
// cross-entropy loss.
//
// Parameters of every layer live in one flat float64 buffer:
//
//   layer 1 weights | layer 1 biases | layer 2 weights | layer 2 biases | ...
//
// Weights are stored input-major: the weight from input j to output i of a
// layer with `fan_out` outputs is at offset j * fan_out + i of that layer's
// weight block. The buffer is what checkpoints persist and what noise and
// norms operate on.

#ifndef DPGEN_MLP_H_
#define DPGEN_MLP_H_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/dataset.h"
#include "dpgen/linalg.h"
#include "dpgen/random.h"

namespace dpgen {

// Layer widths from input to output; hidden layers use ReLU and the output
// layer uses softmax.
class Architecture {
 public:
  // Requires at least one hidden layer, positive widths and >= 2 outputs.
  static absl::StatusOr<Architecture> Create(std::vector<int> layer_sizes);

  // 200 -> 128 -> 16 -> 2.
  static Architecture Default();

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  // Number of weight layers (one less than the number of widths).
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int fan_in(int layer) const { return sizes_[layer]; }
  int fan_out(int layer) const { return sizes_[layer + 1]; }

  std::size_t parameter_count() const { return offsets_.back(); }
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(fan_in(layer)) *
                                 fan_out(layer);
  }

  std::string DebugString() const;

  friend bool operator==(const Architecture& a, const Architecture& b) {
    return a.sizes_ == b.sizes_;
  }

 private:
  explicit Architecture(std::vector<int> sizes);

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
};

// Flat per-layer parameter storage shared by MlpParams and Gradient.
class ParameterVector {
 public:
  // All zeros.
  explicit ParameterVector(Architecture arch);

  const Architecture& architecture() const { return arch_; }

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }

  std::span<double> weights(int layer);
  std::span<const double> weights(int layer) const;
  // The fan_out weights leaving input `input` of `layer`.
  std::span<double> weights_from(int layer, int input);
  std::span<const double> weights_from(int layer, int input) const;
  // (output, input) view of the weights of `layer`.
  MatrixView<double> weight_matrix(int layer);
  MatrixView<const double> weight_matrix(int layer) const;
  std::span<double> biases(int layer);
  std::span<const double> biases(int layer) const;

  void SetZero();

 protected:
  ParameterVector(Architecture arch, std::vector<double> values);
  static absl::Status CheckFlatSize(const Architecture& arch,
                                    std::size_t size);

 private:
  Architecture arch_;
  std::vector<double> values_;
};

class MlpParams : public ParameterVector {
 public:
  using ParameterVector::ParameterVector;
  static absl::StatusOr<MlpParams> FromFlat(Architecture arch,
                                            std::vector<double> values);

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.architecture() == b.architecture() &&
           std::ranges::equal(a.flat(), b.flat());
  }
};

class Gradient : public ParameterVector {
 public:
  using ParameterVector::ParameterVector;
  static absl::StatusOr<Gradient> FromFlat(Architecture arch,
                                           std::vector<double> values);

  friend bool operator==(const Gradient& a, const Gradient& b) {
    return a.architecture() == b.architecture() &&
           std::ranges::equal(a.flat(), b.flat());
  }
};

// Zero-mean Gaussian weights with variance 2 / fan_in, zero biases.
MlpParams InitParams(const Architecture& arch, RandomStream& stream);

struct ForwardTrace {
  // z of every layer, and its activation (ReLU for hidden layers, softmax
  // for the output layer).
  std::vector<Vector> pre_activations;
  std::vector<Vector> activations;

  std::span<const double> probs() const { return activations.back(); }
};

// Reuses the storage of `trace`. Fails with an overflow error naming the
// 1-based layer whose pre-activation is not finite.
absl::Status Forward(const MlpParams& params, std::span<const double> x,
                     ForwardTrace* trace);
absl::StatusOr<ForwardTrace> Forward(const MlpParams& params,
                                     std::span<const double> x);

// exp(z_j - max z) / sum_k exp(z_k - max z).
void Softmax(std::span<const double> logits, std::span<double> out);
Vector Softmax(std::span<const double> logits);

inline constexpr double kLogFloor = 1e-12;

// -sum_k target_k * log(max(probs_k, kLogFloor)).
double CrossEntropyLoss(std::span<const double> probs,
                        std::span<const double> target);

// Index of the largest entry; ties go to the lower index.
int ArgMax(std::span<const double> values);

Vector OneHot(int index, int size);

// Per-example gradient kept as one outer product per layer: the weight
// gradient of layer k is delta_k * input_k^T and its bias gradient is
// delta_k. Inputs of the first layer are the features, inputs of later layers
// are the previous layer's ReLU outputs.
class ExampleGradient {
 public:
  double loss() const { return loss_; }
  std::span<const double> delta(int layer) const { return deltas_[layer]; }
  std::span<const double> input(int layer) const { return inputs_[layer]; }

  // ||g||^2 = sum_k ||delta_k||^2 (||input_k||^2 + 1).
  double SquaredNorm() const;

  // sum += scale * g, touching only columns whose input is non-zero.
  void AddScaledTo(double scale, ParameterVector* sum) const;

  // Dense copy into `out` (which must have the same architecture).
  void MaterializeTo(ParameterVector* out) const;

 private:
  friend absl::Status ComputeExampleGradient(const MlpParams&,
                                             std::span<const double>,
                                             std::span<const double>,
                                             ForwardTrace*, ExampleGradient*);
  double loss_ = 0.0;
  std::vector<Vector> inputs_;
  std::vector<Vector> deltas_;
};

// Backpropagation with the fused softmax/cross-entropy output delta
// (probs - target) and ReLU derivative 0 at z <= 0. `trace` is scratch.
absl::Status ComputeExampleGradient(const MlpParams& params,
                                    std::span<const double> x,
                                    std::span<const double> target,
                                    ForwardTrace* trace, ExampleGradient* out);

struct LossAndGradient {
  double loss;
  Gradient grad;
};

// Dense gradient of the loss for one example. Non-finite entries are an
// explosion error.
absl::StatusOr<LossAndGradient> PerExampleGradient(
    const MlpParams& params, std::span<const double> x,
    std::span<const double> target);

// Fraction of records whose predicted class differs from the label class.
absl::StatusOr<double> ErrorRate(const MlpParams& params,
                                 const Dataset& records);

// Checkpoint layout, all little-endian:
//   8 bytes   magic "DPGNMLP1"
//   uint32    number of layer widths m
//   m uint32  layer widths, input first
//   uint64    flat parameter count P
//   P float64 the flat parameter buffer described at the top of this file
absl::Status WriteCheckpoint(const MlpParams& params, const std::string& path);
absl::StatusOr<MlpParams> ReadCheckpoint(const std::string& path);

}  // namespace dpgen

#endif  // DPGEN_MLP_H_
