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

Architecture Arch(std::vector<int> sizes) {
  return *Architecture::Create(std::move(sizes));
}

TEST(ArchitectureTest, DefaultParameterCount) {
  const Architecture arch = Architecture::Default();
  EXPECT_EQ(arch.layer_sizes(), (std::vector<int>{200, 128, 16, 2}));
  EXPECT_EQ(arch.parameter_count(),
            200u * 128 + 128 + 128 * 16 + 16 + 16 * 2 + 2);
  EXPECT_EQ(arch.parameter_count(), 27826u);
}

TEST(ArchitectureTest, RejectsDegenerateShapes) {
  EXPECT_FALSE(Architecture::Create({200, 2}).ok());
  EXPECT_FALSE(Architecture::Create({200, 16, 1}).ok());
  EXPECT_FALSE(Architecture::Create({200, 0, 2}).ok());
}

TEST(ParameterVectorTest, FlatRoundTrip) {
  const Architecture arch = Arch({4, 3, 2});
  std::vector<double> values(arch.parameter_count());
  std::iota(values.begin(), values.end(), 0.0);
  const MlpParams params = *MlpParams::FromFlat(arch, values);
  EXPECT_TRUE(std::ranges::equal(params.flat(), values));
  const Gradient grad = *Gradient::FromFlat(arch, values);
  EXPECT_TRUE(std::ranges::equal(grad.flat(), values));
  EXPECT_FALSE(MlpParams::FromFlat(arch, std::vector<double>(3)).ok());
}

TEST(InitParamsTest, DeterministicScaledAndZeroBias) {
  const Architecture arch = Architecture::Default();
  RandomStream a(4);
  RandomStream b(4);
  const MlpParams p = InitParams(arch, a);
  EXPECT_EQ(p, InitParams(arch, b));
  for (int k = 0; k < arch.num_layers(); ++k) {
    for (double bias : p.biases(k)) EXPECT_EQ(bias, 0.0);
  }
  const auto w = p.weights(0);
  ASSERT_EQ(w.size(), 25600u);
  const double mean =
      std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size() - 1);
  EXPECT_GE(var, 0.9 * 2.0 / 200);
  EXPECT_LE(var, 1.1 * 2.0 / 200);
}

TEST(ForwardTest, ZeroParamsGiveUniformOutput) {
  const Architecture arch = Architecture::Default();
  const MlpParams params(arch);
  std::vector<double> x(200, 1.0);
  const ForwardTrace trace = *Forward(params, x);
  EXPECT_EQ(trace.probs()[0], 0.5);
  EXPECT_EQ(trace.probs()[1], 0.5);
}

TEST(ForwardTest, MatchesScalarOracle) {
  RandomStream stream(9);
  for (const auto& sizes : {std::vector<int>{200, 128, 16, 2},
                            std::vector<int>{6, 5, 4, 2},
                            std::vector<int>{3, 7, 3}}) {
    const Architecture arch = Arch(sizes);
    for (int trial = 0; trial < 5; ++trial) {
      const MlpParams params = testing::RandomParams(arch, stream, 0.1);
      const std::vector<double> x = testing::RandomInput(sizes[0], stream);
      const ForwardTrace trace = *Forward(params, x);
      const std::vector<double> expected = testing::ScalarForward(params, x);
      for (std::size_t k = 0; k < expected.size(); ++k) {
        EXPECT_NEAR(trace.probs()[k], expected[k], 1e-12);
      }
      EXPECT_NEAR(std::accumulate(trace.probs().begin(), trace.probs().end(),
                                  0.0),
                  1.0, 1e-12);
    }
  }
}

TEST(ForwardTest, OverflowNamesTheLayer) {
  const Architecture arch = Arch({2, 2, 2});
  MlpParams params(arch);
  params.weights(0)[0] = std::numeric_limits<double>::max();
  params.weights(0)[2] = std::numeric_limits<double>::max();
  const std::vector<double> x = {10.0, 10.0};
  const auto trace = Forward(params, x);
  ASSERT_FALSE(trace.ok());
  EXPECT_NE(trace.status().message().find("layer 1"), std::string::npos)
      << trace.status();
}

TEST(SoftmaxTest, EqualLogitsAndTranslationInvariance) {
  EXPECT_EQ(Softmax(std::vector<double>{0.0, 0.0}),
            (std::vector<double>{0.5, 0.5}));
  RandomStream stream(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> z = testing::RandomInput(4, stream);
    const double c = *stream.Gaussian(0.0, 100.0);
    std::vector<double> shifted = z;
    for (double& v : shifted) v += c;
    const Vector a = Softmax(z);
    const Vector b = Softmax(shifted);
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR(a[k], b[k], 1e-12);
      total += a[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const Vector huge = Softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_EQ(huge[0], 1.0);
  EXPECT_EQ(huge[1], 0.0);
}

TEST(LossTest, Examples) {
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(CrossEntropyLoss(half, OneHot(0, 2)), std::log(2.0), 1e-15);
  EXPECT_NEAR(CrossEntropyLoss(half, OneHot(1, 2)), 0.693147, 1e-6);
  EXPECT_EQ(CrossEntropyLoss(std::vector<double>{1.0, 0.0}, OneHot(0, 2)), 0.0);
  EXPECT_NEAR(CrossEntropyLoss(std::vector<double>{0.9, 0.1}, OneHot(1, 2)),
              2.302585, 1e-6);
  // The floor bounds the loss of a certain wrong prediction.
  EXPECT_NEAR(CrossEntropyLoss(std::vector<double>{1.0, 0.0}, OneHot(1, 2)),
              -std::log(1e-12), 1e-9);
}

TEST(ArgMaxTest, TiesGoLow) {
  EXPECT_EQ(ArgMax(std::vector<double>{0.5, 0.5}), 0);
  EXPECT_EQ(ArgMax(std::vector<double>{0.2, 0.8}), 1);
  EXPECT_EQ(ArgMax(std::vector<double>{0.3, 0.4, 0.4}), 1);
}

void ExpectGradientMatchesFiniteDifferences(const std::vector<int>& sizes,
                                            uint64_t seed, int instances) {
  const Architecture arch = Arch(sizes);
  RandomStream stream(seed);
  for (int trial = 0; trial < instances; ++trial) {
    const MlpParams params = testing::RandomParams(arch, stream, 0.5);
    const std::vector<double> x = testing::RandomInput(sizes[0], stream);
    const std::vector<double> target =
        OneHot(static_cast<int>(stream.UniformInt(sizes.back())), sizes.back());
    const LossAndGradient lg = *PerExampleGradient(params, x, target);
    EXPECT_NEAR(lg.loss, testing::ScalarLoss(params, x, target), 1e-12);
    const std::vector<double> fd =
        testing::FiniteDifferenceGradient(params, x, target, 1e-6);
    EXPECT_LT(testing::MaxRelativeError(lg.grad.flat(), fd), 1e-5)
        << "trial " << trial;
  }
}

TEST(GradientTest, SmallNetMatchesFiniteDifferences) {
  ExpectGradientMatchesFiniteDifferences({4, 3, 2}, 101, 10);
}

TEST(GradientTest, DeeperNetMatchesFiniteDifferences) {
  ExpectGradientMatchesFiniteDifferences({6, 5, 4, 2}, 202, 20);
}

TEST(GradientTest, FactoredNormAndAccumulationMatchDenseForm) {
  const Architecture arch = Arch({8, 6, 4, 2});
  RandomStream stream(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MlpParams params = testing::RandomParams(arch, stream, 0.5);
    std::vector<double> x = testing::RandomInput(8, stream);
    x[3] = 0.0;  // exercise the zero-input skip
    const std::vector<double> target = OneHot(trial % 2, 2);
    ForwardTrace trace;
    ExampleGradient example;
    ASSERT_TRUE(
        ComputeExampleGradient(params, x, target, &trace, &example).ok());
    Gradient dense(arch);
    example.MaterializeTo(&dense);
    EXPECT_NEAR(std::sqrt(example.SquaredNorm()),
                testing::NaiveNorm(dense.flat()), 1e-12);

    Gradient sum(arch);
    for (double& v : sum.flat()) v = 1.0;
    example.AddScaledTo(0.5, &sum);
    for (std::size_t k = 0; k < sum.flat().size(); ++k) {
      EXPECT_NEAR(sum.flat()[k], 1.0 + 0.5 * dense.flat()[k], 1e-15);
    }
  }
}

TEST(GradientTest, ZeroWhenTargetEqualsOutput) {
  const Architecture arch = Arch({4, 3, 2});
  const MlpParams params(arch);  // outputs (0.5, 0.5)
  const std::vector<double> x = {1, 0, 1, 1};
  const LossAndGradient lg =
      *PerExampleGradient(params, x, std::vector<double>{0.5, 0.5});
  for (double g : lg.grad.flat()) EXPECT_EQ(g, 0.0);
}

TEST(GradientTest, PureFunction) {
  const Architecture arch = Arch({6, 5, 4, 2});
  RandomStream stream(8);
  const MlpParams params = testing::RandomParams(arch, stream, 0.5);
  const std::vector<double> x = testing::RandomInput(6, stream);
  const auto a = *PerExampleGradient(params, x, OneHot(1, 2));
  const auto b = *PerExampleGradient(params, x, OneHot(1, 2));
  EXPECT_EQ(a.grad, b.grad);
  EXPECT_EQ(a.loss, b.loss);
}

Dataset FourRecords() {
  Dataset data(6);
  const std::vector<std::vector<uint8_t>> rows = {
      {1, 0, 1, 0, 1, 1}, {0, 1, 1, 0, 0, 1}, {1, 1, 0, 1, 0, 0},
      {0, 0, 1, 1, 1, 0}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.AddRecord(rows[i], i % 2 == 0 ? 1 : -1);
  }
  return data;
}

TEST(ErrorRateTest, ZeroParamsOnBalancedData) {
  const MlpParams params(Arch({6, 4, 2}));
  EXPECT_EQ(*ErrorRate(params, FourRecords()), 0.5);
  EXPECT_FALSE(ErrorRate(params, Dataset(6)).ok());
}

TEST(ErrorRateTest, MemorizesFourRecords) {
  const Architecture arch = Arch({6, 8, 2});
  RandomStream stream(12);
  MlpParams params = InitParams(arch, stream);
  const Dataset data = FourRecords();
  for (int step = 0; step < 2000; ++step) {
    params = testing::FullBatchGdStep(params, data, 0.5);
  }
  EXPECT_EQ(*ErrorRate(params, data), 0.0);
}

TEST(CheckpointTest, RoundTripAndLayout) {
  const Architecture arch = Arch({4, 3, 2});
  RandomStream stream(2);
  const MlpParams params = testing::RandomParams(arch, stream, 1.0);
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "ckpt.bin").string();
  ASSERT_TRUE(WriteCheckpoint(params, path).ok());
  EXPECT_EQ(*ReadCheckpoint(path), params);
  EXPECT_EQ(std::filesystem::file_size(path),
            8u + 4u + 3u * 4u + 8u + arch.parameter_count() * 8u);

  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "DPGNMLP1");

  std::ofstream(path, std::ios::binary | std::ios::app) << 'x';
  EXPECT_FALSE(ReadCheckpoint(path).ok());
}

}  // namespace
}  // namespace dpgen
