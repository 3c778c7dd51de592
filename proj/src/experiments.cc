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

#include "dpgen/experiments.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpgen/errors.h"
#include "dpgen/mlp.h"
#include "dpgen/status_macros.h"
#include "dpgen/svg.h"
#include "fmt/format.h"

namespace dpgen {
namespace {

std::string Path(const RunManifest& manifest, const std::string& name) {
  return (std::filesystem::path(manifest.dir()) / name).string();
}

std::string Rate(double value) { return fmt::format("{:.6f}", value); }

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << text;
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed for ", path));
  return absl::OkStatus();
}

// Error rates of the final parameters, from the last snapshot when it is
// current and by direct evaluation otherwise.
absl::StatusOr<std::pair<double, double>> FinalErrors(
    const TrainResult& result, const TrainConfig& config, const Dataset& train,
    const Dataset& test) {
  if (!result.history.empty() &&
      result.history.back().epoch == config.epochs) {
    return std::make_pair(result.history.back().train_error,
                          result.history.back().test_error);
  }
  ASSIGN_OR_RETURN(const double train_error, ErrorRate(result.params, train));
  ASSIGN_OR_RETURN(const double test_error, ErrorRate(result.params, test));
  return std::make_pair(train_error, test_error);
}

int64_t CountExploded(const TrainResult& result) {
  return std::count_if(result.steps.begin(), result.steps.end(),
                       [](const StepRecord& r) { return r.exploded; });
}

ManifestPrivacyEntry PrivacyEntry(const std::string& run,
                                  const PrivacyEvent& event, double delta) {
  ManifestPrivacyEntry entry{run, event, delta, "", ""};
  PrivacyLedger ledger(delta);
  absl::Status added = ledger.AddEvent(event);
  absl::StatusOr<EpsDelta> total =
      added.ok() ? LedgerTotal(ledger) : absl::StatusOr<EpsDelta>(added);
  if (total.ok()) {
    entry.epsilon = fmt::format("{}", total->epsilon);
    entry.delta = total->delta;
  } else {
    entry.note = std::string(total.status().message());
  }
  return entry;
}

std::vector<double> Gaps(const std::vector<FoldResult>& results) {
  std::vector<double> gaps;
  for (const FoldResult& r : results) gaps.push_back(r.diff);
  return gaps;
}

LinePlot CurvePlot(double sigma, const GeneralizationCurve& sgd,
                   const GeneralizationCurve& dpsgd) {
  LinePlot plot{fmt::format("beta vs alpha, sigma = {}", SigmaTag(sigma)),
                "alpha", "beta", {{"SGD", {}}, {"DPSGD", {}}}};
  for (const CurvePoint& p : sgd.points) {
    plot.series[0].points.emplace_back(p.alpha, p.beta);
  }
  for (const CurvePoint& p : dpsgd.points) {
    plot.series[1].points.emplace_back(p.alpha, p.beta);
  }
  return plot;
}

// The default hidden layers on top of the configured attribute count.
absl::StatusOr<Architecture> NetworkFor(const SyntheticSpec& spec) {
  std::vector<int> sizes = Architecture::Default().layer_sizes();
  sizes.front() = spec.attr_count;
  return Architecture::Create(std::move(sizes));
}

std::string OptionalEpoch(const std::optional<int>& epoch) {
  return epoch ? absl::StrCat(*epoch) : "not_converged";
}

}  // namespace

std::string SigmaTag(double sigma) { return fmt::format("{}", sigma); }

absl::Status RunParallel(int count, int threads,
                         const std::function<absl::Status(int)>& job) {
  if (count <= 0) return absl::OkStatus();
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::vector<absl::Status> statuses(count);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  const auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      if (failed) {
        statuses[i] = absl::CancelledError("skipped after an earlier failure");
        continue;
      }
      statuses[i] = job(i);
      if (!statuses[i].ok()) failed = true;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  for (const absl::Status& status : statuses) {
    if (!status.ok() && !absl::IsCancelled(status)) return status;
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> GenerateFoldData(const ExperimentConfig& config) {
  RandomStream stream = RandomStream(config.seed).Fork(kFoldDataStream);
  return Generate(config.data, stream);
}

absl::Status RunGenData(const ExperimentConfig& config, RunManifest* manifest) {
  RETURN_IF_ERROR(config.Validate());
  manifest->AddStream("fold_data",
                      RandomStream(config.seed).Fork(kFoldDataStream));
  RETURN_IF_ERROR(manifest->Write());
  ASSIGN_OR_RETURN(const Dataset dataset, GenerateFoldData(config));
  ASSIGN_OR_RETURN(const FoldSet folds, SplitFolds(dataset, config.folds));

  RETURN_IF_ERROR(WriteCsv(dataset, Path(*manifest, "data.csv")));
  manifest->AddOutput("data.csv");
  std::vector<int> fold_of(dataset.size());
  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    for (std::size_t index : folds.folds[f]) fold_of[index] = static_cast<int>(f);
  }
  std::string text = "record,fold\n";
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    absl::StrAppend(&text, i, ",", fold_of[i], "\n");
  }
  RETURN_IF_ERROR(WriteText(Path(*manifest, "folds.csv"), text));
  manifest->AddOutput("folds.csv");
  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    manifest->AddNote(
        fmt::format("fold {}: {} records", f, folds.folds[f].size()));
  }
  return manifest->Write();
}

absl::StatusOr<OverfitResult> RunOverfit(const ExperimentConfig& config,
                                         RunManifest* manifest) {
  RETURN_IF_ERROR(config.Validate());
  const RandomStream root(config.seed);
  const int k = config.folds;
  const int sigma_count = static_cast<int>(config.sigmas.size());
  manifest->AddStream("fold_data", root.Fork(kFoldDataStream));
  for (int f = 0; f < k; ++f) {
    manifest->AddStream(absl::StrCat("fold_", f),
                        root.Fork(kFoldRunStream).Fork(f));
  }
  RETURN_IF_ERROR(manifest->Write());

  ASSIGN_OR_RETURN(const Dataset dataset, GenerateFoldData(config));
  ASSIGN_OR_RETURN(const FoldSet fold_set, SplitFolds(dataset, k));
  ASSIGN_OR_RETURN(const Architecture arch, NetworkFor(config.data));

  std::vector<Dataset> fold_data;
  std::vector<MlpParams> initial;
  for (int f = 0; f < k; ++f) {
    fold_data.push_back(dataset.Subset(fold_set.folds[f]));
    RandomStream init = root.Fork(kFoldRunStream).Fork(f).Fork(kInitStream);
    initial.push_back(InitParams(arch, init));
  }

  // Job j trains fold j / (1 + S); arm 0 is SGD, arm s > 0 is sigmas[s - 1].
  const int arms = 1 + sigma_count;
  std::vector<FoldResult> results(static_cast<std::size_t>(k) * arms);
  std::vector<int64_t> exploded(results.size(), 0);
  std::vector<std::vector<PrivacyEvent>> events(results.size());
  std::vector<std::string> step_logs(results.size());

  const auto job = [&](int j) -> absl::Status {
    const int f = j / arms;
    const int arm = j % arms;
    TrainConfig train_config = arm == 0 ? config.sgd : config.dpsgd;
    if (arm > 0) train_config.noise_scale = config.sigmas[arm - 1];
    train_config.eval_every = std::max(train_config.epochs, 1);
    const RandomStream stream = root.Fork(kFoldRunStream).Fork(f).Fork(
        arm == 0 ? kSgdArmStream : kDpsgdArmStream);
    ASSIGN_OR_RETURN(TrainResult result,
                     TrainFrom(initial[f], fold_data[f], dataset, train_config,
                               stream));
    ASSIGN_OR_RETURN(const auto errors,
                     FinalErrors(result, train_config, fold_data[f], dataset));
    results[j] = FoldResult::Make(f, errors.first, errors.second);
    exploded[j] = CountExploded(result);
    events[j] = result.privacy_events;
    if (config.write_step_logs) {
      step_logs[j] =
          arm == 0 ? fmt::format("steps_fold{}_sgd.csv", f)
                   : fmt::format("steps_fold{}_sigma_{}.csv", f,
                                 SigmaTag(config.sigmas[arm - 1]));
      RETURN_IF_ERROR(
          WriteStepLogCsv(result.steps, Path(*manifest, step_logs[j])));
    }
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(RunParallel(k * arms, config.threads, job));

  OverfitResult overfit;
  for (int f = 0; f < k; ++f) overfit.sgd.push_back(results[f * arms]);
  const std::vector<double> sgd_gaps = Gaps(overfit.sgd);
  ASSIGN_OR_RETURN(const GeneralizationCurve sgd_curve,
                   ComputeGeneralizationCurve(sgd_gaps, config.alpha_step));

  for (int s = 0; s < sigma_count; ++s) {
    OverfitSigmaResult entry;
    entry.sigma = config.sigmas[s];
    entry.sgd_curve = sgd_curve;
    for (int f = 0; f < k; ++f) {
      entry.dpsgd.push_back(results[f * arms + 1 + s]);
      entry.exploded_steps += exploded[f * arms + 1 + s];
    }
    ASSIGN_OR_RETURN(entry.dpsgd_curve, ComputeGeneralizationCurve(
                                            Gaps(entry.dpsgd),
                                            config.alpha_step));

    const std::string tag = SigmaTag(entry.sigma);
    std::string table =
        "fold,sgd_train,sgd_test,sgd_diff,dpsgd_train,dpsgd_test,dpsgd_diff\n";
    for (int f = 0; f < k; ++f) {
      const FoldResult& a = overfit.sgd[f];
      const FoldResult& b = entry.dpsgd[f];
      absl::StrAppend(&table, f, ",", Rate(a.train_error), ",",
                      Rate(a.full_error), ",", Rate(a.diff), ",",
                      Rate(b.train_error), ",", Rate(b.full_error), ",",
                      Rate(b.diff), "\n");
    }
    const std::string table_name = absl::StrCat("table_sigma_", tag, ".csv");
    RETURN_IF_ERROR(WriteText(Path(*manifest, table_name), table));
    manifest->AddOutput(table_name);

    const std::string curve_name = absl::StrCat("curve_sigma_", tag, ".csv");
    RETURN_IF_ERROR(WriteCurveCsv(entry.sgd_curve, entry.dpsgd_curve,
                                  Path(*manifest, curve_name)));
    manifest->AddOutput(curve_name);
    const std::string svg_name = absl::StrCat("curve_sigma_", tag, ".svg");
    RETURN_IF_ERROR(
        WriteSvg(CurvePlot(entry.sigma, entry.sgd_curve, entry.dpsgd_curve),
                 Path(*manifest, svg_name)));
    manifest->AddOutput(svg_name);

    const std::vector<PrivacyEvent>& fold0 = events[1 + s];
    if (!fold0.empty()) {
      manifest->AddPrivacy(PrivacyEntry(
          fmt::format("overfit sigma={} (each fold)", tag), fold0.front(),
          config.delta));
    }
    if (entry.exploded_steps > 0) {
      manifest->AddNote(fmt::format("sigma {}: {} exploded steps skipped", tag,
                                    entry.exploded_steps));
    }
    overfit.per_sigma.push_back(std::move(entry));
  }
  for (const std::string& log : step_logs) {
    if (!log.empty()) manifest->AddOutput(log);
  }
  RETURN_IF_ERROR(manifest->Write());
  return overfit;
}

absl::StatusOr<ConvergenceResult> RunConvergence(const ExperimentConfig& config,
                                                 RunManifest* manifest) {
  RETURN_IF_ERROR(config.Validate());
  const ConvergenceConfig& conv = config.convergence;
  const RandomStream root(config.seed);
  const RandomStream run = root.Fork(kConvergenceRunStream);
  manifest->AddStream("convergence_data", root.Fork(kConvergenceDataStream));
  manifest->AddStream("convergence_run", run);
  RETURN_IF_ERROR(manifest->Write());

  SyntheticSpec spec = config.data;
  spec.n = conv.n_train + conv.n_test;
  RandomStream data_stream = root.Fork(kConvergenceDataStream);
  ASSIGN_OR_RETURN(const Dataset dataset, Generate(spec, data_stream));
  std::vector<std::size_t> train_index(conv.n_train);
  std::vector<std::size_t> test_index(conv.n_test);
  std::iota(train_index.begin(), train_index.end(), std::size_t{0});
  std::iota(test_index.begin(), test_index.end(),
            static_cast<std::size_t>(conv.n_train));
  const Dataset train = dataset.Subset(train_index);
  const Dataset test = dataset.Subset(test_index);

  ASSIGN_OR_RETURN(const Architecture arch, NetworkFor(spec));
  RandomStream init_stream = run.Fork(kInitStream);
  const MlpParams initial = InitParams(arch, init_stream);
  Snapshot start;
  ASSIGN_OR_RETURN(start.train_error, ErrorRate(initial, train));
  ASSIGN_OR_RETURN(start.test_error, ErrorRate(initial, test));

  const int sigma_count = static_cast<int>(conv.sigmas.size());
  std::vector<ConvergenceArm> arms(1 + sigma_count);
  std::vector<MlpParams> finals(arms.size(), initial);
  std::vector<std::vector<PrivacyEvent>> events(arms.size());

  const auto job = [&](int j) -> absl::Status {
    TrainConfig train_config = j == 0 ? config.sgd : config.dpsgd;
    train_config.epochs = conv.epochs;
    train_config.eval_every = conv.eval_every;
    train_config.lot_size = j == 0 ? conv.sgd_lot_size : conv.dpsgd_lot_size;
    if (j > 0) train_config.noise_scale = conv.sigmas[j - 1];
    ASSIGN_OR_RETURN(
        TrainResult result,
        TrainFrom(initial, train, test, train_config,
                  run.Fork(j == 0 ? kSgdArmStream : kDpsgdArmStream)));
    arms[j].sigma = j == 0 ? 0.0 : conv.sigmas[j - 1];
    arms[j].history.push_back(start);
    arms[j].history.insert(arms[j].history.end(), result.history.begin(),
                           result.history.end());
    ASSIGN_OR_RETURN(arms[j].report,
                     AnalyzeConvergence(arms[j].history, config.plateau_tol));
    finals[j] = std::move(result.params);
    events[j] = std::move(result.privacy_events);
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(RunParallel(1 + sigma_count, config.threads, job));

  ConvergenceResult out;
  out.sgd = arms[0];
  std::string report =
      "sigma,arm,train_plateau_epoch,test_plateau_epoch,final_train_error,"
      "final_test_error\n";
  const auto report_row = [&](const std::string& sigma, const char* arm,
                              const ConvergenceReport& r) {
    absl::StrAppend(&report, sigma, ",", arm, ",", OptionalEpoch(r.train_epoch),
                    ",", OptionalEpoch(r.test_epoch), ",",
                    Rate(r.final_train_error), ",", Rate(r.final_test_error),
                    "\n");
  };
  report_row("-", "sgd", arms[0].report);

  if (config.write_checkpoints) {
    RETURN_IF_ERROR(WriteCheckpoint(finals[0], Path(*manifest, "model_sgd.bin")));
    manifest->AddOutput("model_sgd.bin");
  }
  for (int s = 0; s < sigma_count; ++s) {
    const ConvergenceArm& arm = arms[1 + s];
    const std::string tag = SigmaTag(arm.sigma);
    report_row(tag, "dpsgd", arm.report);

    const TrainHistory& a = arms[0].history;
    const TrainHistory& b = arm.history;
    std::string csv = "epoch,sgd_train,sgd_test,dpsgd_train,dpsgd_test\n";
    LinePlot plot{fmt::format("accuracy vs epochs, sigma = {}", tag),
                  "epoch",
                  "accuracy",
                  {{"SGD train", {}},
                   {"SGD test", {}},
                   {"DPSGD train", {}},
                   {"DPSGD test", {}}}};
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double values[4] = {1.0 - a[i].train_error, 1.0 - a[i].test_error,
                                1.0 - b[i].train_error, 1.0 - b[i].test_error};
      absl::StrAppend(&csv, a[i].epoch);
      for (int c = 0; c < 4; ++c) {
        absl::StrAppend(&csv, ",", Rate(values[c]));
        plot.series[c].points.emplace_back(a[i].epoch, values[c]);
      }
      csv += "\n";
    }
    const std::string csv_name = absl::StrCat("convergence_sigma_", tag, ".csv");
    RETURN_IF_ERROR(WriteText(Path(*manifest, csv_name), csv));
    manifest->AddOutput(csv_name);
    const std::string svg_name = absl::StrCat("convergence_sigma_", tag, ".svg");
    RETURN_IF_ERROR(WriteSvg(plot, Path(*manifest, svg_name)));
    manifest->AddOutput(svg_name);

    if (config.write_checkpoints) {
      const std::string model_name =
          absl::StrCat("model_dpsgd_sigma_", tag, ".bin");
      RETURN_IF_ERROR(WriteCheckpoint(finals[1 + s], Path(*manifest, model_name)));
      manifest->AddOutput(model_name);
    }
    if (!events[1 + s].empty()) {
      manifest->AddPrivacy(PrivacyEntry(fmt::format("convergence sigma={}", tag),
                                        events[1 + s].front(), config.delta));
    }
    out.dpsgd.push_back(arm);
  }
  RETURN_IF_ERROR(
      WriteText(Path(*manifest, "convergence_report.csv"), report));
  manifest->AddOutput("convergence_report.csv");
  RETURN_IF_ERROR(manifest->Write());
  return out;
}

std::vector<AccountantRow> RunAccountant(const std::vector<double>& sigmas,
                                         double q, int64_t steps,
                                         double delta) {
  std::vector<AccountantRow> rows;
  const StrongCompositionAccountant accountant;
  for (double sigma : sigmas) {
    AccountantRow row{sigma, q, steps, std::nullopt, ""};
    absl::StatusOr<EventBudget> budget =
        accountant.EventTotal(PrivacyEvent{sigma, q, steps}, delta);
    if (budget.ok()) {
      row.budget = *budget;
    } else {
      row.error = std::string(budget.status().message());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatAccountantTable(const std::vector<AccountantRow>& rows) {
  std::string out =
      "sigma,q,steps,eps_step,eps_amplified,eps_total,delta_total\n";
  for (const AccountantRow& row : rows) {
    absl::StrAppend(&out, fmt::format("{},{},{}", row.sigma, row.q, row.steps));
    if (row.budget) {
      absl::StrAppend(
          &out, fmt::format(",{:.6g},{:.6g},{:.6g},{:.6g}\n",
                            row.budget->epsilon_step,
                            row.budget->epsilon_amplified,
                            row.budget->total.epsilon, row.budget->total.delta));
    } else {
      absl::StrAppend(&out,
                      ",out_of_regime,out_of_regime,out_of_regime,out_of_regime\n");
    }
  }
  return out;
}

absl::Status PlotCsv(const std::string& input, const std::string& output) {
  std::ifstream in(input, std::ios::binary);
  if (!in) return absl::InvalidArgumentError(absl::StrCat("cannot read ", input));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(absl::StrCat(input, " is empty"));
  }
  const std::vector<std::string> header = absl::StrSplit(line, ',');
  if (header.size() < 2 || (header[0] != "alpha" && header[0] != "epoch")) {
    return absl::InvalidArgumentError(absl::StrCat(
        input, ": expected a curve (alpha,...) or convergence (epoch,...) CSV"));
  }
  const bool curve = header[0] == "alpha";
  LinePlot plot{std::filesystem::path(input).stem().string(),
                header[0],
                curve ? "beta" : "accuracy",
                {}};
  for (std::size_t c = 1; c < header.size(); ++c) {
    plot.series.push_back({header[c], {}});
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat(input, ": row ", row, " has ", cells.size(),
                       " columns, expected ", header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!absl::SimpleAtod(cells[c], &values[c])) {
        return absl::InvalidArgumentError(
            absl::StrCat(input, ": row ", row, " has a non-numeric cell"));
      }
    }
    for (std::size_t c = 1; c < values.size(); ++c) {
      plot.series[c - 1].points.emplace_back(values[0], values[c]);
    }
  }
  return WriteSvg(plot, output);
}

}  // namespace dpgen
