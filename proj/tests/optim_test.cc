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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "dpgen/errors.h"
#include "dpgen/linalg.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpgen {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Architecture Arch(std::vector<int> sizes) {
  return *Architecture::Create(std::move(sizes));
}

Gradient WithNorm(const Architecture& arch, double norm) {
  Gradient g(arch);
  g.flat()[0] = norm * 0.6;
  g.flat()[1] = norm * 0.8;
  return g;
}

TEST(ClipTest, Examples) {
  const Architecture arch = Arch({3, 2, 2});
  const Gradient small = WithNorm(arch, 2.0);
  EXPECT_EQ(*Clip(small, 4.0), small);

  const Gradient big = *Clip(WithNorm(arch, 8.0), 4.0);
  EXPECT_NEAR(L2Norm(big.flat()), 4.0, 1e-12);
  EXPECT_NEAR(big.flat()[0], 8.0 * 0.6 / 2.0, 1e-12);

  const Gradient zero(arch);
  EXPECT_EQ(*Clip(zero, 4.0), zero);

  Gradient broken(arch);
  broken.flat()[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(IsExplosion(Clip(broken, 4.0).status()));
  EXPECT_FALSE(Clip(small, 0.0).ok());
}

TEST(ClipTest, ClippedNormsNeverExceedBound) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(31);
  for (double clip : {0.01, 0.1, 1.0, 4.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      const MlpParams params = testing::RandomParams(arch, stream, 1.0);
      const std::vector<double> x = testing::RandomInput(6, stream);
      const LossAndGradient lg =
          *PerExampleGradient(params, x, OneHot(trial % 2, 2));
      const Gradient clipped = *Clip(lg.grad, clip);
      EXPECT_LE(testing::NaiveNorm(clipped.flat()), clip * (1.0 + 1e-12));

      ForwardTrace trace;
      ExampleGradient example;
      ASSERT_TRUE(ComputeExampleGradient(params, x, OneHot(trial % 2, 2),
                                         &trace, &example)
                      .ok());
      const double norm = std::sqrt(example.SquaredNorm());
      EXPECT_LE(norm / ClipDivisor(norm, clip), clip * (1.0 + 1e-12));
    }
  }
}

TEST(SampleLotTest, FullRateTakesEverything) {
  RandomStream stream(1);
  const auto lot = *SampleLot(50, 1.0, stream);
  ASSERT_EQ(lot.size(), 50u);
  for (std::size_t i = 0; i < lot.size(); ++i) EXPECT_EQ(lot[i], i);
  EXPECT_FALSE(SampleLot(50, 0.0, stream).ok());
  EXPECT_FALSE(SampleLot(50, 1.5, stream).ok());
}

TEST(SampleLotTest, MeanSizeMatchesRate) {
  RandomStream root(2);
  double total = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    RandomStream stream = root.Fork(t);
    const auto lot = *SampleLot(10000, 0.5, stream);
    EXPECT_TRUE(std::is_sorted(lot.begin(), lot.end()));
    total += static_cast<double>(lot.size());
  }
  EXPECT_NEAR(total / trials, 5000.0, 3.0 * 50.0 / std::sqrt(trials));
}

TrainConfig SgdConfig(int lot_size) {
  TrainConfig config;
  config.mode = TrainMode::kSgd;
  config.learning_rate = 0.1;
  config.lot_size = lot_size;
  config.noise_scale = 0.0;
  config.clip_norm = kInf;
  return config;
}

TEST(StepTest, NoiselessFullLotDpsgdEqualsSgdAndFullBatchGd) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(41);
  const Dataset data = testing::RandomDataset(40, 6, stream);
  MlpParams sgd = testing::RandomParams(arch, stream, 0.5);
  MlpParams dpsgd = sgd;
  MlpParams oracle = sgd;

  const TrainConfig sgd_config = SgdConfig(40);
  TrainConfig dp_config = sgd_config;
  dp_config.mode = TrainMode::kDpsgd;
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  StepWorkspace workspace(arch);
  const RandomStream root(3);
  for (int step = 0; step < 5; ++step) {
    ASSERT_TRUE(SgdStep(&sgd, data, all, sgd_config, step, &workspace).ok());
    StepStreams streams = StepStreams::ForStep(root, step);
    const StepRecord record =
        *DpsgdStep(&dpsgd, data, dp_config, streams, step, &workspace);
    EXPECT_EQ(record.lot_size, 40);
    EXPECT_EQ(record.clipped_fraction, 0.0);
    oracle = testing::FullBatchGdStep(oracle, data, 0.1);
    EXPECT_EQ(sgd, dpsgd);
    for (std::size_t k = 0; k < oracle.flat().size(); ++k) {
      EXPECT_NEAR(dpsgd.flat()[k], oracle.flat()[k], 1e-12);
    }
  }
}

TEST(StepTest, NoiseMomentsMatchMechanism) {
  const double sigma = 2.0;
  const std::vector<double> inc = testing::SaturatedNoiseIncrements(sigma, 5000, nullptr);
  const double n = static_cast<double>(inc.size());
  const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / n;
  double var = 0.0;
  for (double v : inc) var += (v - mean) * (v - mean);
  var /= n - 1;
  // eta * sigma * C / L with eta = 0.1, C = 1, L = 10.
  const double expected_var = std::pow(0.1 * sigma * 1.0 / 10.0, 2);
  EXPECT_NEAR(var, expected_var, 0.1 * expected_var);
  EXPECT_LE(std::fabs(mean), 4.0 * std::sqrt(expected_var / n));
}

TEST(StepTest, SigmaOnlyChangesTheNoise) {
  std::vector<int64_t> lots_one;
  std::vector<int64_t> lots_two;
  const std::vector<double> one = testing::SaturatedNoiseIncrements(1.0, 50, &lots_one);
  const std::vector<double> two = testing::SaturatedNoiseIncrements(2.0, 50, &lots_two);
  EXPECT_EQ(lots_one, lots_two);
  ASSERT_EQ(one.size(), two.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_NEAR(two[i], 2.0 * one[i], 1e-12);
  }
}

TEST(StepTest, ExplosionPolicies) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(8);
  const Dataset data = testing::RandomDataset(20, 6, stream);
  const MlpParams start = testing::RandomParams(arch, stream, 0.5);
  TrainConfig config;
  config.mode = TrainMode::kDpsgd;
  config.learning_rate = 1e308;
  config.lot_size = 20;
  config.noise_scale = 1e10;
  config.clip_norm = 4.0;
  StepWorkspace workspace(arch);

  MlpParams aborted = start;
  StepStreams streams = StepStreams::ForStep(RandomStream(1), 0);
  const auto failed =
      DpsgdStep(&aborted, data, config, streams, 0, &workspace);
  ASSERT_FALSE(failed.ok());
  EXPECT_TRUE(IsExplosion(failed.status()));
  EXPECT_EQ(aborted, start);

  config.explosion_policy = ExplosionPolicy::kSkipStep;
  MlpParams skipped = start;
  streams = StepStreams::ForStep(RandomStream(1), 0);
  const StepRecord record =
      *DpsgdStep(&skipped, data, config, streams, 0, &workspace);
  EXPECT_TRUE(record.exploded);
  EXPECT_EQ(skipped, start);
}

TEST(TrainTest, ZeroEpochsReturnsInitialParameters) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(9);
  const Dataset data = testing::RandomDataset(20, 6, stream);
  const MlpParams start = testing::RandomParams(arch, stream, 0.5);
  TrainConfig config;
  config.epochs = 0;
  config.lot_size = 10;
  const TrainResult result =
      *TrainFrom(start, data, data, config, RandomStream(2));
  EXPECT_EQ(result.params, start);
  EXPECT_TRUE(result.history.empty());
  EXPECT_TRUE(result.steps.empty());
  EXPECT_TRUE(result.privacy_events.empty());
}

TEST(TrainTest, DeterministicAndRecordsSchedule) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(10);
  const Dataset train = testing::RandomDataset(40, 6, stream);
  const Dataset test = testing::RandomDataset(40, 6, stream);
  TrainConfig config;
  config.epochs = 5;
  config.lot_size = 16;
  config.noise_scale = 1.0;
  config.eval_every = 2;
  const TrainResult a = *Train(train, test, config, arch, RandomStream(5));
  const TrainResult b = *Train(train, test, config, arch, RandomStream(5));
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.history[0].epoch, 2);
  EXPECT_EQ(a.history[2].epoch, 5);
  EXPECT_EQ(a.history[2].lots, 5 * StepsPerEpoch(40, 16));
  EXPECT_EQ(a.steps.size(), 15u);
  ASSERT_EQ(a.privacy_events.size(), 1u);
  EXPECT_EQ(a.privacy_events[0].steps, 15);
  EXPECT_DOUBLE_EQ(a.privacy_events[0].sampling_rate, 0.4);

  TrainConfig sgd = SgdConfig(16);
  sgd.epochs = 3;
  const TrainResult s1 = *Train(train, test, sgd, arch, RandomStream(5));
  const TrainResult s2 = *Train(train, test, sgd, arch, RandomStream(5));
  EXPECT_EQ(s1.params, s2.params);
  EXPECT_TRUE(s1.privacy_events.empty());
  // The last minibatch of each epoch is short.
  EXPECT_EQ(s1.steps[2].lot_size, 8);
}

TEST(TrainTest, RejectsOversizedLot) {
  const Architecture arch = Arch({6, 5, 2});
  RandomStream stream(10);
  const Dataset data = testing::RandomDataset(10, 6, stream);
  TrainConfig config;
  config.lot_size = 11;
  EXPECT_FALSE(Train(data, data, config, arch, RandomStream(1)).ok());
}

TEST(StepLogTest, WritesOneRowPerStep) {
  std::vector<StepRecord> steps(3);
  for (int i = 0; i < 3; ++i) steps[i].step = i;
  steps[1].exploded = true;
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "steps.csv").string();
  ASSERT_TRUE(WriteStepLogCsv(steps, path).ok());
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "step,lot_size,preclip_mean_norm,clipped_frac,exploded");
  EXPECT_EQ(lines[2].back(), '1');
}

}  // namespace
}  // namespace dpgen
