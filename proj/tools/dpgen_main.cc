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

// dpgen: data generation, experiments, privacy accounting and plotting.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
// arguments, 3 training explosion under the abort policy.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpgen/config.h"
#include "dpgen/errors.h"
#include "dpgen/experiments.h"
#include "dpgen/manifest.h"
#include "fmt/format.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitExplosion = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out = "out";
  std::string scale = "desk";
  std::string sigma;
};

void AddCommonFlags(CLI::App* command, CommonFlags* flags) {
  command->add_option("--config", flags->config_path, "Config file");
  command->add_option("--seed", flags->seed, "Master seed");
  command->add_option("--out", flags->out, "Output directory")
      ->capture_default_str();
  command->add_option("--scale", flags->scale, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  command->add_option("--sigma", flags->sigma,
                      "Comma-separated noise multipliers");
}

enum class SigmaTarget { kOverfit, kConvergence };

absl::StatusOr<dpgen::ExperimentConfig> BuildConfig(const CommonFlags& flags,
                                                    SigmaTarget target) {
  absl::StatusOr<dpgen::RunScale> scale = dpgen::ParseScale(flags.scale);
  if (!scale.ok()) return scale.status();
  dpgen::ExperimentConfig config = dpgen::ExperimentConfig::ForScale(*scale);
  if (!flags.config_path.empty()) {
    absl::StatusOr<dpgen::ExperimentConfig> loaded =
        dpgen::LoadConfig(flags.config_path, config);
    if (!loaded.ok()) return loaded.status();
    config = *std::move(loaded);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.sigma.empty()) {
    absl::StatusOr<std::vector<double>> sigmas =
        dpgen::ParseSigmaList(flags.sigma);
    if (!sigmas.ok()) return sigmas.status();
    if (target == SigmaTarget::kOverfit) {
      config.sigmas = *sigmas;
    } else {
      config.convergence.sigmas = *sigmas;
    }
  }
  if (absl::Status valid = config.Validate(); !valid.ok()) return valid;
  return config;
}

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return 0;
  if (dpgen::IsExplosion(status)) return kExitExplosion;
  if (absl::IsInvalidArgument(status)) return kExitConfig;
  return kExitRuntime;
}

int Report(const absl::Status& status) {
  if (!status.ok()) std::cerr << "dpgen: " << status << "\n";
  return ExitCodeFor(status);
}

// Runs `body` with a manifest in flags.out, recording its final status.
template <typename Body>
int RunWithManifest(const CommonFlags& flags, const std::string& command,
                    SigmaTarget target, Body body) {
  absl::StatusOr<dpgen::ExperimentConfig> config = BuildConfig(flags, target);
  if (!config.ok()) {
    std::cerr << "dpgen: config error: " << config.status().message() << "\n";
    return kExitConfig;
  }
  std::error_code error;
  std::filesystem::create_directories(flags.out, error);
  if (error) {
    std::cerr << "dpgen: cannot create " << flags.out << ": "
              << error.message() << "\n";
    return kExitRuntime;
  }
  dpgen::RunManifest manifest(flags.out, command, *config);
  if (absl::Status written = manifest.Write(); !written.ok()) {
    return Report(written);
  }
  const absl::Status status = body(*config, &manifest);
  const absl::Status finished = manifest.Finish(status);
  if (!status.ok()) return Report(status);
  return Report(finished);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private SGD generalization experiments"};
  app.require_subcommand(1);

  CommonFlags gen_flags, overfit_flags, convergence_flags, accountant_flags;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate the k-fold dataset");
  AddCommonFlags(gen, &gen_flags);

  CLI::App* overfit = app.add_subcommand(
      "overfit", "SGD vs DPSGD generalization tables and curves");
  AddCommonFlags(overfit, &overfit_flags);

  CLI::App* convergence = app.add_subcommand(
      "convergence", "Train/test accuracy as a function of epochs");
  AddCommonFlags(convergence, &convergence_flags);

  CLI::App* accountant =
      app.add_subcommand("accountant", "Privacy budget per noise multiplier");
  AddCommonFlags(accountant, &accountant_flags);
  std::optional<double> q;
  std::optional<int64_t> steps;
  std::optional<double> delta;
  accountant->add_option("--q", q, "Sampling rate (default L / fold size)");
  accountant->add_option("--steps", steps,
                         "Number of steps (default epochs * ceil(N / L))");
  accountant->add_option("--delta", delta, "Target delta");

  CLI::App* plot = app.add_subcommand("plot", "Render a result CSV as SVG");
  std::string plot_input;
  std::string plot_output;
  plot->add_option("--input", plot_input, "Curve or convergence CSV")
      ->required();
  plot->add_option("--out", plot_output,
                   "Output SVG (default: input with .svg extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*gen) {
    return RunWithManifest(gen_flags, "gen-data", SigmaTarget::kOverfit,
                           [](const dpgen::ExperimentConfig& config,
                              dpgen::RunManifest* manifest) {
                             return dpgen::RunGenData(config, manifest);
                           });
  }
  if (*overfit) {
    return RunWithManifest(
        overfit_flags, "overfit", SigmaTarget::kOverfit,
        [](const dpgen::ExperimentConfig& config,
           dpgen::RunManifest* manifest) -> absl::Status {
          absl::StatusOr<dpgen::OverfitResult> result =
              dpgen::RunOverfit(config, manifest);
          if (!result.ok()) return result.status();
          for (const dpgen::OverfitSigmaResult& entry : result->per_sigma) {
            std::cout << fmt::format(
                "sigma {}: alpha_max sgd {:.4f} dpsgd {:.4f}\n",
                dpgen::SigmaTag(entry.sigma), entry.sgd_curve.AlphaMax(),
                entry.dpsgd_curve.AlphaMax());
          }
          return absl::OkStatus();
        });
  }
  if (*convergence) {
    return RunWithManifest(
        convergence_flags, "convergence", SigmaTarget::kConvergence,
        [](const dpgen::ExperimentConfig& config,
           dpgen::RunManifest* manifest) -> absl::Status {
          absl::StatusOr<dpgen::ConvergenceResult> result =
              dpgen::RunConvergence(config, manifest);
          if (!result.ok()) return result.status();
          const auto show = [](const std::optional<int>& epoch) {
            return epoch ? std::to_string(*epoch) : std::string("-");
          };
          std::cout << fmt::format("sgd: train plateau {} test plateau {}\n",
                                   show(result->sgd.report.train_epoch),
                                   show(result->sgd.report.test_epoch));
          for (const dpgen::ConvergenceArm& arm : result->dpsgd) {
            std::cout << fmt::format(
                "dpsgd sigma {}: train plateau {} test plateau {}\n",
                dpgen::SigmaTag(arm.sigma), show(arm.report.train_epoch),
                show(arm.report.test_epoch));
          }
          return absl::OkStatus();
        });
  }
  if (*accountant) {
    absl::StatusOr<dpgen::ExperimentConfig> config =
        BuildConfig(accountant_flags, SigmaTarget::kOverfit);
    if (!config.ok()) {
      std::cerr << "dpgen: config error: " << config.status().message()
                << "\n";
      return kExitConfig;
    }
    const int64_t fold_size = config->data.n / config->folds;
    const int lot = config->dpsgd.lot_size;
    const double rate =
        q.value_or(static_cast<double>(lot) / static_cast<double>(fold_size));
    const int64_t total_steps = steps.value_or(
        static_cast<int64_t>(config->dpsgd.epochs) *
        ((fold_size + lot - 1) / lot));
    const double target_delta = delta.value_or(config->delta);
    if (!(rate > 0.0 && rate <= 1.0) || total_steps <= 0 ||
        !(target_delta > 0.0 && target_delta < 1.0)) {
      std::cerr << "dpgen: config error: need 0 < q <= 1, steps > 0 and "
                   "0 < delta < 1\n";
      return kExitConfig;
    }
    const std::vector<dpgen::AccountantRow> rows =
        dpgen::RunAccountant(config->sigmas, rate, total_steps, target_delta);
    std::cout << dpgen::FormatAccountantTable(rows);
    for (const dpgen::AccountantRow& row : rows) {
      if (!row.budget) {
        std::cerr << fmt::format("sigma {}: {}\n", dpgen::SigmaTag(row.sigma),
                                 row.error);
      }
    }
    return 0;
  }
  if (*plot) {
    if (plot_output.empty()) {
      plot_output =
          std::filesystem::path(plot_input).replace_extension(".svg").string();
    }
    return Report(dpgen::PlotCsv(plot_input, plot_output));
  }
  return kExitRuntime;
}
