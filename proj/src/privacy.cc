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

#include "absl/strings/str_cat.h"
#include "dpgen/errors.h"
#include "dpgen/status_macros.h"

namespace dpgen {
namespace {

absl::Status CheckDelta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return absl::OkStatus();
}

// sqrt(2 ln(1.25 / delta)); positive for delta in (0, 1).
double CalibrationConstant(double delta) {
  return std::sqrt(2.0 * std::log(1.25 / delta));
}

}  // namespace

absl::StatusOr<GaussianMechanism> GaussianMechanism::Create(
    double sensitivity, double noise_scale) {
  if (!(sensitivity > 0.0) || !(noise_scale > 0.0)) {
    return absl::InvalidArgumentError(
        "Gaussian mechanism needs positive sensitivity and noise scale");
  }
  return GaussianMechanism(sensitivity, noise_scale);
}

absl::StatusOr<double> GaussianMechanism::Epsilon(double delta) const {
  return EpsilonForSigma(noise_scale_, delta);
}

absl::StatusOr<double> SigmaForEpsilon(double epsilon, double delta) {
  RETURN_IF_ERROR(CheckDelta(delta));
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (epsilon >= 1.0) {
    return OutOfRegimeError(absl::StrCat(
        "Gaussian calibration only holds for epsilon < 1, got ", epsilon));
  }
  return CalibrationConstant(delta) / epsilon;
}

absl::StatusOr<double> EpsilonForSigma(double sigma, double delta) {
  RETURN_IF_ERROR(CheckDelta(delta));
  if (!(sigma > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be positive, got ", sigma));
  }
  const double epsilon = CalibrationConstant(delta) / sigma;
  if (epsilon >= 1.0) {
    return OutOfRegimeError(absl::StrCat(
        "sigma=", sigma, " at delta=", delta, " gives per-step epsilon ",
        epsilon, " >= 1, outside the Gaussian calibration regime"));
  }
  return epsilon;
}

absl::StatusOr<EpsDelta> Amplify(EpsDelta step, double q) {
  if (!(step.epsilon >= 0.0 && step.epsilon <= 1.0)) {
    return OutOfRegimeError(absl::StrCat(
        "amplification needs per-step epsilon <= 1, got ", step.epsilon));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling rate must lie in (0, 1], got ", q));
  }
  return EpsDelta{std::log1p(q * std::expm1(step.epsilon)), q * step.delta};
}

EpsDelta ComposeSequential(std::span<const EpsDelta> steps) {
  EpsDelta total;
  for (const EpsDelta& step : steps) {
    total.epsilon += step.epsilon;
    total.delta += step.delta;
  }
  return total;
}

absl::StatusOr<EpsDelta> ComposeStrong(double epsilon_step, double delta_step,
                                       int64_t steps, double delta_slack) {
  if (steps < 1) {
    return absl::InvalidArgumentError("strong composition needs steps >= 1");
  }
  if (!(delta_slack > 0.0 && delta_slack < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta slack must lie in (0, 1), got ", delta_slack));
  }
  const double t = static_cast<double>(steps);
  const double epsilon =
      std::sqrt(2.0 * t * std::log(1.0 / delta_slack)) * epsilon_step +
      t * epsilon_step * std::expm1(epsilon_step);
  return EpsDelta{epsilon, t * delta_step + delta_slack};
}

absl::Status PrivacyLedger::AddEvent(const PrivacyEvent& event) {
  if (!(event.sampling_rate > 0.0 && event.sampling_rate <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sampling rate must lie in (0, 1], got ", event.sampling_rate));
  }
  if (event.steps <= 0) {
    return absl::InvalidArgumentError("event step count must be positive");
  }
  if (!(event.sigma > 0.0)) {
    return absl::InvalidArgumentError("event sigma must be positive");
  }
  events_.push_back(event);
  return absl::OkStatus();
}

absl::Status PrivacyLedger::Validate() const { return CheckDelta(target_delta_); }

absl::StatusOr<EpsDelta> Accountant::Total(const PrivacyLedger& ledger) const {
  RETURN_IF_ERROR(ledger.Validate());
  std::vector<EpsDelta> totals;
  for (std::size_t i = 0; i < ledger.events().size(); ++i) {
    absl::StatusOr<EventBudget> budget =
        EventTotal(ledger.events()[i], ledger.target_delta());
    if (!budget.ok()) {
      return absl::Status(budget.status().code(),
                          absl::StrCat("ledger event ", i, ": ",
                                       budget.status().message()));
    }
    totals.push_back(budget->total);
  }
  return ComposeSequential(totals);
}

absl::StatusOr<EventBudget> StrongCompositionAccountant::EventTotal(
    const PrivacyEvent& event, double delta) const {
  EventBudget budget;
  ASSIGN_OR_RETURN(budget.epsilon_step, EpsilonForSigma(event.sigma, delta));
  ASSIGN_OR_RETURN(const EpsDelta amplified,
                   Amplify({budget.epsilon_step, delta}, event.sampling_rate));
  budget.epsilon_amplified = amplified.epsilon;
  ASSIGN_OR_RETURN(const EpsDelta strong,
                   ComposeStrong(amplified.epsilon, amplified.delta,
                                 event.steps, delta));
  const double t = static_cast<double>(event.steps);
  const EpsDelta sequential{t * amplified.epsilon, t * amplified.delta};
  budget.total = strong.epsilon < sequential.epsilon ? strong : sequential;
  return budget;
}

absl::StatusOr<EpsDelta> LedgerTotal(const PrivacyLedger& ledger) {
  return StrongCompositionAccountant().Total(ledger);
}

}  // namespace dpgen
