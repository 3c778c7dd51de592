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

#include "dpgen/dataset.h"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "dpgen/status_macros.h"

namespace dpgen {

absl::Status SyntheticSpec::Validate() const {
  if (n < 0 || n % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("record count must be even and non-negative, got ", n));
  }
  if (attr_count <= 0) {
    return absl::InvalidArgumentError("attr_count must be positive");
  }
  if (noise_attr_count < 0 || noise_attr_count > attr_count) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise_attr_count must lie in [0, ", attr_count,
                     "], got ", noise_attr_count));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("p must lie in [0, 1], got ", p));
  }
  if (!(b >= 0.0 && b <= 0.5)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bias offset b must lie in [0, 0.5], got ", b));
  }
  for (int label : {1, -1}) {
    const double q = BiasedProbability(p, b, label);
    if (!(q >= 0.0 && q <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("biased probability out of [0, 1]: ", q));
    }
  }
  return absl::OkStatus();
}

double BiasedProbability(double p, double b, int label) {
  return p * (0.5 + (label > 0 ? b : -b));
}

void Dataset::Reserve(std::size_t n) {
  bits_.reserve(n * attr_count_);
  labels_.reserve(n);
}

void Dataset::AddRecord(std::span<const uint8_t> attributes, int label) {
  assert(attributes.size() == static_cast<std::size_t>(attr_count_));
  assert(label == 1 || label == -1);
  bits_.insert(bits_.end(), attributes.begin(), attributes.end());
  labels_.push_back(static_cast<int8_t>(label));
}

void Dataset::Features(std::size_t i, std::span<double> out) const {
  const std::span<const uint8_t> row = attributes(i);
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j];
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out(attr_count_);
  out.Reserve(indices.size());
  for (std::size_t i : indices) out.AddRecord(attributes(i), label(i));
  return out;
}

std::size_t Dataset::CountLabel(int label) const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), static_cast<int8_t>(label)));
}

absl::StatusOr<Dataset> Generate(const SyntheticSpec& spec,
                                 RandomStream& stream) {
  RETURN_IF_ERROR(spec.Validate());
  Dataset dataset(spec.attr_count);
  dataset.Reserve(static_cast<std::size_t>(spec.n));
  std::vector<uint8_t> row(spec.attr_count);
  for (int64_t i = 0; i < spec.n; ++i) {
    const int label = (i % 2 == 0) ? 1 : -1;
    const double biased = BiasedProbability(spec.p, spec.b, label);
    for (int j = 0; j < spec.attr_count; ++j) {
      const double prob = j < spec.noise_attr_count ? spec.p : biased;
      row[j] = stream.NextUniform() < prob ? 1 : 0;
    }
    dataset.AddRecord(row, label);
  }
  return dataset;
}

absl::StatusOr<FoldSet> SplitFolds(const Dataset& dataset, int k) {
  if (k <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("fold count must be positive, got ", k));
  }
  const std::size_t positives = dataset.CountLabel(1);
  const std::size_t negatives = dataset.CountLabel(-1);
  if (dataset.size() % k != 0 || (dataset.size() / k) % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot split ", dataset.size(), " records into ", k,
                     " folds of even size"));
  }
  if (positives != negatives || positives % k != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("labels must be balanced and divisible by ", k,
                     " (got ", positives, " positive, ", negatives,
                     " negative)"));
  }
  FoldSet set;
  set.folds.resize(k);
  std::size_t seen_positive = 0;
  std::size_t seen_negative = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::size_t& seen = dataset.label(i) > 0 ? seen_positive : seen_negative;
    set.folds[seen % k].push_back(i);
    ++seen;
  }
  return set;
}

absl::Status WriteCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    return absl::UnavailableError(absl::StrCat("cannot open ", path));
  }
  std::string line;
  for (int j = 1; j <= dataset.attr_count(); ++j) {
    absl::StrAppend(&line, "a", j, ",");
  }
  line += "label\n";
  out << line;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    line.clear();
    for (uint8_t bit : dataset.attributes(i)) {
      line.push_back(bit ? '1' : '0');
      line.push_back(',');
    }
    line += dataset.label(i) > 0 ? "1\n" : "-1\n";
    out << line;
  }
  out.flush();
  if (!out) {
    return absl::DataLossError(absl::StrCat("write failed for ", path));
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": missing header row"));
  }
  const std::vector<absl::string_view> header = absl::StrSplit(line, ',');
  const int attr_count = static_cast<int>(header.size()) - 1;
  if (attr_count <= 0 || header.back() != "label") {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": header must be a1,...,aN,label"));
  }
  for (int j = 0; j < attr_count; ++j) {
    if (header[j] != absl::StrCat("a", j + 1)) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ": header column ", j + 1, " is '", header[j], "'"));
    }
  }

  Dataset dataset(attr_count);
  std::vector<uint8_t> row(attr_count);
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<absl::string_view> fields = absl::StrSplit(line, ',');
    if (fields.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ": row ", row_number, " has ", fields.size() - 1,
          " attributes, expected ", attr_count));
    }
    for (int j = 0; j < attr_count; ++j) {
      if (fields[j] == "0") {
        row[j] = 0;
      } else if (fields[j] == "1") {
        row[j] = 1;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat(path, ": row ", row_number, " attribute a", j + 1,
                         " is not a bit: '", fields[j], "'"));
      }
    }
    int label;
    if (fields.back() == "1") {
      label = 1;
    } else if (fields.back() == "-1") {
      label = -1;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ": row ", row_number, " has invalid label '", fields.back(),
          "'"));
    }
    dataset.AddRecord(row, label);
  }
  return dataset;
}

}  // namespace dpgen
