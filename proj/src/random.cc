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

#include "dpgen/random.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dpgen {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85;
constexpr int kPhiloxRounds = 10;

// Separates the two 64-bit halves of the stream identity.
constexpr uint64_t kLowChainSalt = 0x6a09e667f3bcc908ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t* hi, uint32_t* lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  *hi = static_cast<uint32_t>(product >> 32);
  *lo = static_cast<uint32_t>(product);
}

inline uint64_t Join(uint32_t hi, uint32_t lo) {
  return (static_cast<uint64_t>(hi) << 32) | lo;
}

// (0, 1]; never zero so that log() stays finite.
inline double OpenClosedUniform(uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * kTwoPow53Inv;
}

inline double ClosedOpenUniform(uint64_t bits) {
  return static_cast<double>(bits >> 11) * kTwoPow53Inv;
}

}  // namespace

PhiloxCounter Philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < kPhiloxRounds; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], &hi0, &lo0);
    MulHiLo(kPhiloxM1, ctr[2], &hi1, &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

uint64_t Mix64(uint64_t x) {
  uint64_t z = x + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(uint64_t seed)
    : RandomStream(seed, {}, Mix64(seed), Mix64(seed ^ kLowChainSalt)) {}

RandomStream::RandomStream(uint64_t seed, std::vector<uint32_t> path,
                           uint64_t id_hi, uint64_t id_lo)
    : seed_(seed), path_(std::move(path)), id_hi_(id_hi), id_lo_(id_lo) {}

RandomStream RandomStream::Fork(uint32_t label) const {
  std::vector<uint32_t> child_path = path_;
  child_path.push_back(label);
  const uint64_t tag = Mix64(static_cast<uint64_t>(label) | (1ULL << 32));
  return RandomStream(seed_, std::move(child_path), Mix64(id_hi_ ^ tag),
                      Mix64(id_lo_ + tag));
}

std::string RandomStream::DebugString() const {
  std::string out = absl::StrCat(seed_);
  for (uint32_t label : path_) absl::StrAppend(&out, "/", label);
  return out;
}

PhiloxCounter RandomStream::NextBlock() {
  const PhiloxCounter ctr = {
      static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
      static_cast<uint32_t>(id_lo_), static_cast<uint32_t>(id_lo_ >> 32)};
  const PhiloxKey key = {static_cast<uint32_t>(id_hi_),
                         static_cast<uint32_t>(id_hi_ >> 32)};
  ++counter_;
  return Philox4x32(ctr, key);
}

uint64_t RandomStream::NextU64() {
  const PhiloxCounter block = NextBlock();
  return Join(block[0], block[1]);
}

double RandomStream::NextUniform() { return ClosedOpenUniform(NextU64()); }

uint64_t RandomStream::UniformInt(uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(NextU64()) * n;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < n) {
    const uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(NextU64()) * n;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

absl::StatusOr<bool> RandomStream::Bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Bernoulli probability must lie in [0, 1], got ", p));
  }
  return NextUniform() < p;
}

absl::StatusOr<double> RandomStream::Gaussian(double mean, double stddev) {
  if (!(stddev >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Gaussian stddev must be non-negative, got ", stddev));
  }
  const PhiloxCounter block = NextBlock();
  const double u1 = OpenClosedUniform(Join(block[0], block[1]));
  const double u2 = ClosedOpenUniform(Join(block[2], block[3]));
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

absl::Status RandomStream::FillGaussian(std::span<double> out, double mean,
                                        double stddev) {
  if (!(stddev >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Gaussian stddev must be non-negative, got ", stddev));
  }
  std::size_t i = 0;
  while (i < out.size()) {
    const PhiloxCounter block = NextBlock();
    const double u1 = OpenClosedUniform(Join(block[0], block[1]));
    const double u2 = ClosedOpenUniform(Join(block[2], block[3]));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i++] = mean + stddev * (radius * std::cos(angle));
    if (i < out.size()) out[i++] = mean + stddev * (radius * std::sin(angle));
  }
  return absl::OkStatus();
}

void RandomStream::Shuffle(std::span<std::size_t> values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(UniformInt(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace dpgen
