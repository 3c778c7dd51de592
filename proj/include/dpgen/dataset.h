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

#ifndef DPGEN_DATASET_H_
#define DPGEN_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/random.h"

namespace dpgen {

// Parameters of the biased-Bernoulli dataset. The first `noise_attr_count`
// attributes are Bernoulli(p) regardless of label; the remaining attributes
// are Bernoulli(BiasedProbability(p, b, label)).
struct SyntheticSpec {
  int64_t n = 20000;
  int attr_count = 200;
  int noise_attr_count = 100;
  double p = 0.5;
  double b = 0.05;

  absl::Status Validate() const;
};

// Success probability of a class-informative attribute: p * (0.5 + b) for
// label +1 and p * (0.5 - b) for label -1.
double BiasedProbability(double p, double b, int label);

// Records with binary attributes and labels in {+1, -1}. Label +1 is class 1
// (one-hot [0, 1]); label -1 is class 0 (one-hot [1, 0]).
class Dataset {
 public:
  explicit Dataset(int attr_count) : attr_count_(attr_count) {}

  int attr_count() const { return attr_count_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  void Reserve(std::size_t n);
  // `attributes` must have attr_count entries, each 0 or 1; label is +1/-1.
  void AddRecord(std::span<const uint8_t> attributes, int label);

  std::span<const uint8_t> attributes(std::size_t i) const {
    return {bits_.data() + i * attr_count_,
            static_cast<std::size_t>(attr_count_)};
  }
  int label(std::size_t i) const { return labels_[i]; }
  int class_index(std::size_t i) const { return labels_[i] > 0 ? 1 : 0; }

  // Writes the attributes of record i as 0.0 / 1.0.
  void Features(std::size_t i, std::span<double> out) const;

  // New dataset holding the given records in the given order.
  Dataset Subset(std::span<const std::size_t> indices) const;

  std::size_t CountLabel(int label) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  int attr_count_;
  std::vector<uint8_t> bits_;
  std::vector<int8_t> labels_;
};

// Record i gets label +1 when i is even and -1 otherwise. Attributes are drawn
// record by record, attribute by attribute, from `stream`.
absl::StatusOr<Dataset> Generate(const SyntheticSpec& spec,
                                 RandomStream& stream);

struct FoldSet {
  std::vector<std::vector<std::size_t>> folds;
};

// Deals the records of each label round-robin over k folds (the j-th record
// with a given label goes to fold j mod k). Requires both labels to occur
// equally often with counts divisible by k, so every fold is label balanced.
// Indices within a fold are ascending.
absl::StatusOr<FoldSet> SplitFolds(const Dataset& dataset, int k);

// CSV with header "a1,...,aN,label"; one record per row, attributes 0/1,
// label 1 or -1.
absl::Status WriteCsv(const Dataset& dataset, const std::string& path);
absl::StatusOr<Dataset> ReadCsv(const std::string& path);

}  // namespace dpgen

#endif  // DPGEN_DATASET_H_
