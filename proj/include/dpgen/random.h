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

#ifndef DPGEN_RANDOM_H_
#define DPGEN_RANDOM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpgen {

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

// The Philox4x32-10 block function of Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3" (SC 2011).
PhiloxCounter Philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer; used to derive stream keys from (seed, path).
uint64_t Mix64(uint64_t x);

// A deterministic, splittable stream of random draws.
//
// A stream is identified by a master seed and a fork path. Each draw
// encrypts (stream identity, draw counter) with Philox4x32-10, so two streams
// with the same seed and path produce the same sequence no matter how draws
// on other streams are interleaved. Every scalar draw consumes exactly one
// 128-bit block.
//
// Gaussian variates use the Box-Muller transform on the two 64-bit halves of
// one block: u1 in (0, 1] from the first half, u2 in [0, 1) from the second,
// z = sqrt(-2 ln u1) * cos(2 pi u2). FillGaussian also uses the sine branch,
// so it produces two variates per block.
//
// Streams are not thread safe; give each task its own fork.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed);

  // Returns the child stream for `label`. The parent is not advanced.
  RandomStream Fork(uint32_t label) const;

  uint64_t seed() const { return seed_; }
  const std::vector<uint32_t>& path() const { return path_; }
  uint64_t counter() const { return counter_; }

  // 64-bit digest of (seed, path); stable across runs and hosts.
  uint64_t id() const { return id_hi_; }

  // "seed/label/label/..." for manifests and diagnostics.
  std::string DebugString() const;

  PhiloxCounter NextBlock();
  uint64_t NextU64();

  // Uniform on [0, 1) with 53 random bits.
  double NextUniform();

  // Uniform integer in [0, n); n must be positive. Unbiased (Lemire).
  uint64_t UniformInt(uint64_t n);

  absl::StatusOr<bool> Bernoulli(double p);
  absl::StatusOr<double> Gaussian(double mean, double stddev);

  // Fills `out` with N(mean, stddev^2) draws, two per block.
  absl::Status FillGaussian(std::span<double> out, double mean,
                            double stddev);

  // Fisher-Yates shuffle driven by UniformInt.
  void Shuffle(std::span<std::size_t> values);

 private:
  RandomStream(uint64_t seed, std::vector<uint32_t> path, uint64_t id_hi,
               uint64_t id_lo);

  uint64_t seed_;
  std::vector<uint32_t> path_;
  uint64_t id_hi_;
  uint64_t id_lo_;
  uint64_t counter_ = 0;
};

}  // namespace dpgen

#endif  // DPGEN_RANDOM_H_
