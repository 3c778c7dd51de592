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

// Privacy budget accounting for noisy gradient descent.
//
// Each training step releases a Gaussian-noised sum whose per-example
// contribution is clipped to norm C and noised with stddev sigma * C. The
// accounting chain is:
//
//   1. Gaussian calibration: sigma = sqrt(2 ln(1.25 / delta)) / eps, valid
//      for eps < 1. Solved for eps this gives the per-step budget.
//   2. Amplification by Poisson subsampling with rate q:
//      eps' = ln(1 + q (e^eps - 1)), delta' = q delta.
//   3. Composition over T steps, taking the better of
//        sequential: (T eps', T delta')
//        strong:     (sqrt(2 T ln(1 / slack)) eps' + T eps' (e^eps' - 1),
//                     T delta' + slack)
//
// Accountant is the extension point for tighter methods.

#ifndef DPGEN_PRIVACY_H_
#define DPGEN_PRIVACY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpgen {

struct EpsDelta {
  double epsilon = 0.0;
  double delta = 0.0;
};

class GaussianMechanism {
 public:
  static absl::StatusOr<GaussianMechanism> Create(double sensitivity,
                                                  double noise_scale);

  double sensitivity() const { return sensitivity_; }
  double noise_scale() const { return noise_scale_; }
  double stddev() const { return sensitivity_ * noise_scale_; }

  // Per-release budget at the given delta; out-of-regime when eps >= 1.
  absl::StatusOr<double> Epsilon(double delta) const;

 private:
  GaussianMechanism(double sensitivity, double noise_scale)
      : sensitivity_(sensitivity), noise_scale_(noise_scale) {}

  double sensitivity_;
  double noise_scale_;
};

// Requires 0 < eps < 1 and 0 < delta < 1.
absl::StatusOr<double> SigmaForEpsilon(double epsilon, double delta);

// Requires sigma > 0 and 0 < delta < 1; out-of-regime error if eps >= 1.
absl::StatusOr<double> EpsilonForSigma(double sigma, double delta);

// Requires step.epsilon <= 1 and 0 < q <= 1.
absl::StatusOr<EpsDelta> Amplify(EpsDelta step, double q);

EpsDelta ComposeSequential(std::span<const EpsDelta> steps);

// Requires steps >= 1 and 0 < delta_slack < 1.
absl::StatusOr<EpsDelta> ComposeStrong(double epsilon_step, double delta_step,
                                       int64_t steps, double delta_slack);

struct PrivacyEvent {
  double sigma = 0.0;
  double sampling_rate = 1.0;
  int64_t steps = 0;
};

class PrivacyLedger {
 public:
  explicit PrivacyLedger(double target_delta) : target_delta_(target_delta) {}

  double target_delta() const { return target_delta_; }
  const std::vector<PrivacyEvent>& events() const { return events_; }

  absl::Status AddEvent(const PrivacyEvent& event);
  absl::Status Validate() const;

 private:
  double target_delta_;
  std::vector<PrivacyEvent> events_;
};

// Budget of one ledger event, with the intermediate values.
struct EventBudget {
  double epsilon_step = 0.0;
  double epsilon_amplified = 0.0;
  EpsDelta total;
};

class Accountant {
 public:
  virtual ~Accountant() = default;
  virtual absl::StatusOr<EventBudget> EventTotal(const PrivacyEvent& event,
                                                 double delta) const = 0;
  // Sequential composition of the per-event totals.
  absl::StatusOr<EpsDelta> Total(const PrivacyLedger& ledger) const;
};

// Calibration, amplification, then the better of sequential and strong
// composition for each event. The per-step delta and the strong-composition
// slack are both the ledger's target delta.
class StrongCompositionAccountant : public Accountant {
 public:
  absl::StatusOr<EventBudget> EventTotal(const PrivacyEvent& event,
                                         double delta) const override;
};

absl::StatusOr<EpsDelta> LedgerTotal(const PrivacyLedger& ledger);

}  // namespace dpgen

#endif  // DPGEN_PRIVACY_H_
