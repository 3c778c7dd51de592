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

#include "dpgen/linalg.h"

#include <cmath>
#include <limits>
#include <vector>

#include "dpgen/random.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpgen {
namespace {

TEST(L2NormTest, SmallCases) {
  EXPECT_EQ(L2Norm(std::vector<double>{0.0, 0.0, 0.0}), 0.0);
  EXPECT_EQ(L2Norm(std::vector<double>{3.0, 4.0}), 5.0);
  EXPECT_EQ(L2Norm(std::vector<double>{}), 0.0);
}

TEST(L2NormTest, MatchesSummationOracle) {
  RandomStream stream(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(100);
    for (double& x : v) x = *stream.Gaussian(0.0, 3.0);
    const double expected = testing::NaiveNorm(v);
    EXPECT_LT(std::fabs(L2Norm(v) - expected) / expected, 1e-12);
  }
}

TEST(LinalgTest, AxpyScaleDot) {
  std::vector<double> x = {1.0, 2.0, 3.0};
  std::vector<double> y = {1.0, 1.0, 1.0};
  Axpy(2.0, x, y);
  EXPECT_EQ(y, (std::vector<double>{3.0, 5.0, 7.0}));
  Scale(0.5, y);
  EXPECT_EQ(y, (std::vector<double>{1.5, 2.5, 3.5}));
  EXPECT_EQ(Dot(x, y), 1.5 + 5.0 + 10.5);
}

TEST(LinalgTest, AllFinite) {
  EXPECT_TRUE(AllFinite(std::vector<double>{1.0, -2.0}));
  EXPECT_FALSE(
      AllFinite(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}));
  EXPECT_FALSE(
      AllFinite(std::vector<double>{std::numeric_limits<double>::quiet_NaN()}));
}

TEST(MatrixViewTest, StridedAccess) {
  std::vector<double> data = {0, 1, 2, 3, 4, 5};
  // Column-major 2 x 3.
  MatrixView<double> m(data.data(), 2, 3, 1, 2);
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(1, 0), 1);
  EXPECT_EQ(m(0, 2), 4);
  m(1, 2) = 9;
  EXPECT_EQ(data[5], 9);
}

}  // namespace
}  // namespace dpgen
