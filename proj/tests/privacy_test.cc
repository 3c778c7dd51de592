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

#include "dpgen/privacy.h"

#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"

namespace dpgen {
namespace {

constexpr double kDelta = 1e-5;

TEST(CalibrationTest, KnownValues) {
  EXPECT_NEAR(*EpsilonForSigma(10.0, kDelta), 0.4845, 1e-4);
  EXPECT_NEAR(*EpsilonForSigma(10.0, kDelta),
              std::sqrt(2.0 * std::log(125000.0)) / 10.0, 1e-15);
  EXPECT_NEAR(*EpsilonForSigma(20.0, kDelta),
              *EpsilonForSigma(10.0, kDelta) / 2.0, 1e-15);
  EXPECT_NEAR(*SigmaForEpsilon(0.2, kDelta),
              2.0 * *SigmaForEpsilon(0.4, kDelta), 1e-12);
}

TEST(CalibrationTest, OutOfRegimeAndDomainErrors) {
  const auto low_sigma = EpsilonForSigma(2.0, kDelta);
  ASSERT_FALSE(low_sigma.ok());
  EXPECT_TRUE(absl::IsOutOfRange(low_sigma.status()));
  EXPECT_TRUE(absl::IsOutOfRange(SigmaForEpsilon(1.0, kDelta).status()));
  EXPECT_TRUE(absl::IsInvalidArgument(SigmaForEpsilon(0.5, 1.25).status()));
  EXPECT_TRUE(absl::IsInvalidArgument(EpsilonForSigma(10.0, 0.0).status()));
  EXPECT_TRUE(absl::IsInvalidArgument(EpsilonForSigma(-1.0, kDelta).status()));
  EXPECT_FALSE(GaussianMechanism::Create(4.0, 0.0).ok());
}

TEST(CalibrationTest, RoundTripAndStrictlyDecreasing) {
  double previous = 1.0;
  for (double sigma = 5.0; sigma <= 100.0; sigma += 0.5) {
    const double eps = *EpsilonForSigma(sigma, kDelta);
    EXPECT_NEAR(*SigmaForEpsilon(eps, kDelta), sigma, 1e-12 * sigma);
    EXPECT_LT(eps, previous);
    previous = eps;
  }
  const GaussianMechanism mech = *GaussianMechanism::Create(4.0, 10.0);
  EXPECT_EQ(mech.stddev(), 40.0);
  EXPECT_EQ(*mech.Epsilon(kDelta), *EpsilonForSigma(10.0, kDelta));
}

TEST(AmplifyTest, Examples) {
  EXPECT_NEAR(Amplify({0.5, 0.0}, 0.01)->epsilon, 0.006466, 1e-6);
  const EpsDelta same = *Amplify({0.3, 1e-5}, 1.0);
  EXPECT_NEAR(same.epsilon, 0.3, 1e-15);
  EXPECT_EQ(same.delta, 1e-5);
  EXPECT_NEAR(Amplify({0.3, 1e-5}, 0.1)->delta, 1e-6, 1e-21);
  EXPECT_TRUE(absl::IsOutOfRange(Amplify({1.5, 0.0}, 0.1).status()));
  EXPECT_FALSE(Amplify({0.5, 0.0}, 0.0).ok());
}

TEST(AmplifyTest, BoundedByLinearTerm) {
  for (double eps = 0.01; eps <= 1.0; eps += 0.01) {
    for (double q : {1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0}) {
      const double amplified = Amplify({eps, 0.0}, q)->epsilon;
      EXPECT_LE(amplified, q * eps * std::exp(eps) * (1 + 1e-12));
      EXPECT_LE(amplified, eps * (1 + 1e-12));
    }
  }
}

TEST(ComposeTest, Sequential) {
  const std::vector<EpsDelta> same(7, EpsDelta{0.25, 0.0});
  const EpsDelta total = ComposeSequential(same);
  EXPECT_DOUBLE_EQ(total.epsilon, 7 * 0.25);
  EXPECT_EQ(total.delta, 0.0);
  EXPECT_EQ(ComposeSequential({}).epsilon, 0.0);
  const std::vector<EpsDelta> mixed = {{0.1, 1e-6}, {0.2, 1e-6}};
  EXPECT_NEAR(ComposeSequential(mixed).epsilon, 0.3, 1e-15);
  EXPECT_NEAR(ComposeSequential(mixed).delta, 2e-6, 1e-21);
}

TEST(ComposeTest, StrongBeatsSequentialForSmallSteps) {
  const double eps = 0.006466;
  const int64_t steps = 15625;
  const EpsDelta strong = *ComposeStrong(eps, 0.0, steps, kDelta);
  const double oracle = std::sqrt(2.0 * steps * std::log(1.0 / kDelta)) * eps +
                        steps * eps * (std::exp(eps) - 1.0);
  EXPECT_NEAR(strong.epsilon, oracle, 1e-12 * oracle);
  EXPECT_LT(strong.epsilon, steps * eps);
  EXPECT_EQ(strong.delta, kDelta);
  EXPECT_GE(ComposeStrong(0.3, 0.0, 1, kDelta)->epsilon, 0.3);
  EXPECT_FALSE(ComposeStrong(0.3, 0.0, 0, kDelta).ok());
  EXPECT_FALSE(ComposeStrong(0.3, 0.0, 5, 1.0).ok());
}

TEST(ComposeTest, StrongGrowsWithRootT) {
  for (double eps : {1e-5, 1e-4, 1e-3}) {
    for (int64_t t : {10, 100, 1000}) {
      const EpsDelta small = *ComposeStrong(eps, 0.0, t, kDelta);
      ASSERT_LT(t * eps * std::expm1(eps), 0.01 * small.epsilon);
      const double ratio =
          ComposeStrong(eps, 0.0, 4 * t, kDelta)->epsilon / small.epsilon;
      EXPECT_GE(ratio, 1.9);
      EXPECT_LE(ratio, 2.1);
    }
  }
}

const std::vector<double> kSigmas = {5.0, 6.0, 8.0, 10.0, 40.0};
const std::vector<double> kRates = {0.001, 0.01, 0.05, 0.1, 0.5};
const std::vector<int64_t> kSteps = {1, 10, 100, 1000, 15625};

double Total(double sigma, double q, int64_t steps) {
  PrivacyLedger ledger(kDelta);
  EXPECT_TRUE(ledger.AddEvent({sigma, q, steps}).ok());
  return LedgerTotal(ledger)->epsilon;
}

TEST(LedgerTest, MonotoneOverGrid) {
  for (std::size_t s = 0; s < kSigmas.size(); ++s) {
    for (std::size_t r = 0; r < kRates.size(); ++r) {
      for (std::size_t t = 0; t < kSteps.size(); ++t) {
        const double here = Total(kSigmas[s], kRates[r], kSteps[t]);
        if (t + 1 < kSteps.size()) {
          EXPECT_LE(here, Total(kSigmas[s], kRates[r], kSteps[t + 1]));
        }
        if (r + 1 < kRates.size()) {
          EXPECT_LE(here, Total(kSigmas[s], kRates[r + 1], kSteps[t]));
        }
        if (s + 1 < kSigmas.size()) {
          EXPECT_GE(here, Total(kSigmas[s + 1], kRates[r], kSteps[t]));
        }
        EXPECT_LE(here, Total(kSigmas[s], kRates[r], 2 * kSteps[t]));
      }
    }
  }
}

TEST(LedgerTest, DominatedBySequentialComposition) {
  for (double sigma : kSigmas) {
    for (double q : kRates) {
      for (int64_t steps : kSteps) {
        const EpsDelta step = *Amplify({*EpsilonForSigma(sigma, kDelta), kDelta}, q);
        const std::vector<EpsDelta> all(steps, step);
        EXPECT_LE(Total(sigma, q, steps),
                  ComposeSequential(all).epsilon * (1 + 1e-12));
      }
    }
  }
}

TEST(LedgerTest, SingleEventMatchesDirectComposition) {
  const double q = 0.096;
  const int64_t steps = 1560;
  const EpsDelta step = *Amplify({*EpsilonForSigma(8.0, kDelta), kDelta}, q);
  const EpsDelta strong = *ComposeStrong(step.epsilon, step.delta, steps, kDelta);
  const double total = Total(8.0, q, steps);
  EXPECT_DOUBLE_EQ(total, std::min(strong.epsilon, steps * step.epsilon));
}

TEST(LedgerTest, HeterogeneousEventsAddAndEmptyIsZero) {
  PrivacyLedger empty(kDelta);
  const EpsDelta none = *LedgerTotal(empty);
  EXPECT_EQ(none.epsilon, 0.0);
  EXPECT_EQ(none.delta, 0.0);

  PrivacyLedger ledger(kDelta);
  ASSERT_TRUE(ledger.AddEvent({8.0, 0.1, 100}).ok());
  ASSERT_TRUE(ledger.AddEvent({10.0, 0.05, 300}).ok());
  EXPECT_NEAR(LedgerTotal(ledger)->epsilon,
              Total(8.0, 0.1, 100) + Total(10.0, 0.05, 300), 1e-12);
}

TEST(LedgerTest, ErrorsNameTheEvent) {
  PrivacyLedger ledger(kDelta);
  ASSERT_TRUE(ledger.AddEvent({8.0, 0.1, 100}).ok());
  ASSERT_TRUE(ledger.AddEvent({2.0, 0.1, 100}).ok());
  const auto total = LedgerTotal(ledger);
  ASSERT_FALSE(total.ok());
  EXPECT_TRUE(absl::IsOutOfRange(total.status()));
  EXPECT_NE(total.status().message().find("event 1"), std::string::npos);
  EXPECT_FALSE(ledger.AddEvent({8.0, 0.0, 1}).ok());
  EXPECT_FALSE(ledger.AddEvent({8.0, 0.5, 0}).ok());
}

}  // namespace
}  // namespace dpgen
