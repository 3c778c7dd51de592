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

#include "dpgen/config.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpgen/status_macros.h"
#include "fmt/format.h"

namespace dpgen {
namespace {

using Setter =
    std::function<absl::Status(absl::string_view, ExperimentConfig&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  ConfigKey key;
  Getter get;
  Setter set;
};

std::string FormatReal(double value) { return fmt::format("{}", value); }

std::string FormatList(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += FormatReal(values[i]);
  }
  return out;
}

absl::StatusOr<double> ParseReal(absl::string_view text) {
  double value = 0.0;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (!absl::SimpleAtod(text, &value) || std::isnan(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected a real number, got '", text, "'"));
  }
  return value;
}

template <typename Int>
absl::StatusOr<Int> ParseInt(absl::string_view text) {
  Int value = 0;
  if (!absl::SimpleAtoi(text, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected an integer, got '", text, "'"));
  }
  return value;
}

absl::StatusOr<bool> ParseBool(absl::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  return absl::InvalidArgumentError(
      absl::StrCat("expected true or false, got '", text, "'"));
}

Field RealField(std::string name, std::string unit,
                double ExperimentConfig::*outer) {
  return {{name, "real", unit},
          [outer](const ExperimentConfig& c) { return FormatReal(c.*outer); },
          [outer](absl::string_view text, ExperimentConfig& c) {
            ASSIGN_OR_RETURN(c.*outer, ParseReal(text));
            return absl::OkStatus();
          }};
}

// Fields nested one level down, e.g. data.p or sgd.lot_size.
template <typename Outer, typename T>
Field NestedField(std::string name, std::string type, std::string unit,
                  Outer ExperimentConfig::*outer, T Outer::*inner) {
  return {{name, type, unit},
          [outer, inner](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return FormatReal(c.*outer.*inner);
            } else {
              return absl::StrCat(c.*outer.*inner);
            }
          },
          [outer, inner](absl::string_view text, ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              ASSIGN_OR_RETURN(c.*outer.*inner, ParseReal(text));
            } else {
              ASSIGN_OR_RETURN(c.*outer.*inner, ParseInt<T>(text));
            }
            return absl::OkStatus();
          }};
}

template <typename T>
Field IntField(std::string name, std::string unit,
               T ExperimentConfig::*member) {
  return {{name, "int", unit},
          [member](const ExperimentConfig& c) {
            return absl::StrCat(c.*member);
          },
          [member](absl::string_view text, ExperimentConfig& c) {
            ASSIGN_OR_RETURN(c.*member, ParseInt<T>(text));
            return absl::OkStatus();
          }};
}

Field BoolField(std::string name, bool ExperimentConfig::*member) {
  return {{name, "bool", "-"},
          [member](const ExperimentConfig& c) {
            return std::string(c.*member ? "true" : "false");
          },
          [member](absl::string_view text, ExperimentConfig& c) {
            ASSIGN_OR_RETURN(c.*member, ParseBool(text));
            return absl::OkStatus();
          }};
}

const std::vector<Field>& Fields() {
  using C = ExperimentConfig;
  static const std::vector<Field>* fields = new std::vector<Field>{
      IntField("seed", "-", &C::seed),
      IntField("folds", "folds", &C::folds),
      {{"sigmas", "real_list", "noise multiplier"},
       [](const C& c) { return FormatList(c.sigmas); },
       [](absl::string_view text, C& c) {
         ASSIGN_OR_RETURN(c.sigmas, ParseSigmaList(text));
         return absl::OkStatus();
       }},
      {{"explosion_policy", "enum(abort|skip)", "-"},
       [](const C& c) {
         return std::string(c.dpsgd.explosion_policy == ExplosionPolicy::kAbort
                                ? "abort"
                                : "skip");
       },
       [](absl::string_view text, C& c) {
         ExplosionPolicy policy;
         if (text == "abort") {
           policy = ExplosionPolicy::kAbort;
         } else if (text == "skip") {
           policy = ExplosionPolicy::kSkipStep;
         } else {
           return absl::InvalidArgumentError(
               absl::StrCat("expected abort or skip, got '", text, "'"));
         }
         c.sgd.explosion_policy = policy;
         c.dpsgd.explosion_policy = policy;
         return absl::OkStatus();
       }},
      RealField("delta", "probability", &C::delta),
      RealField("alpha_step", "error rate", &C::alpha_step),
      RealField("plateau_tol", "error rate", &C::plateau_tol),
      IntField("threads", "threads", &C::threads),
      BoolField("write_step_logs", &C::write_step_logs),
      BoolField("write_checkpoints", &C::write_checkpoints),
      NestedField("data.n", "int", "records", &C::data, &SyntheticSpec::n),
      NestedField("data.attr_count", "int", "attributes", &C::data,
                  &SyntheticSpec::attr_count),
      NestedField("data.noise_attr_count", "int", "attributes", &C::data,
                  &SyntheticSpec::noise_attr_count),
      NestedField("data.p", "real", "probability", &C::data,
                  &SyntheticSpec::p),
      NestedField("data.b", "real", "probability offset", &C::data,
                  &SyntheticSpec::b),
      NestedField("sgd.learning_rate", "real", "step size", &C::sgd,
                  &TrainConfig::learning_rate),
      NestedField("sgd.lot_size", "int", "examples", &C::sgd,
                  &TrainConfig::lot_size),
      NestedField("sgd.epochs", "int", "epochs", &C::sgd,
                  &TrainConfig::epochs),
      NestedField("dpsgd.learning_rate", "real", "step size", &C::dpsgd,
                  &TrainConfig::learning_rate),
      NestedField("dpsgd.lot_size", "int", "examples", &C::dpsgd,
                  &TrainConfig::lot_size),
      NestedField("dpsgd.clip_norm", "real", "l2 norm", &C::dpsgd,
                  &TrainConfig::clip_norm),
      NestedField("dpsgd.epochs", "int", "epochs", &C::dpsgd,
                  &TrainConfig::epochs),
      NestedField("convergence.n_train", "int", "records", &C::convergence,
                  &ConvergenceConfig::n_train),
      NestedField("convergence.n_test", "int", "records", &C::convergence,
                  &ConvergenceConfig::n_test),
      NestedField("convergence.epochs", "int", "epochs", &C::convergence,
                  &ConvergenceConfig::epochs),
      NestedField("convergence.eval_every", "int", "epochs", &C::convergence,
                  &ConvergenceConfig::eval_every),
      NestedField("convergence.sgd_lot_size", "int", "examples",
                  &C::convergence, &ConvergenceConfig::sgd_lot_size),
      NestedField("convergence.dpsgd_lot_size", "int", "examples",
                  &C::convergence, &ConvergenceConfig::dpsgd_lot_size),
      {{"convergence.sigmas", "real_list", "noise multiplier"},
       [](const C& c) { return FormatList(c.convergence.sigmas); },
       [](absl::string_view text, C& c) {
         ASSIGN_OR_RETURN(c.convergence.sigmas, ParseSigmaList(text));
         return absl::OkStatus();
       }},
  };
  return *fields;
}

absl::Status CheckSigmas(const std::vector<double>& sigmas,
                         absl::string_view key, bool allow_empty) {
  if (sigmas.empty() && !allow_empty) {
    return absl::InvalidArgumentError(absl::StrCat(key, " must be non-empty"));
  }
  for (double sigma : sigmas) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      return absl::InvalidArgumentError(
          absl::StrCat(key, " entries must be finite and non-negative"));
    }
  }
  return absl::OkStatus();
}

absl::Status Prefix(absl::string_view what, const absl::Status& status) {
  if (status.ok()) return status;
  return absl::Status(status.code(), absl::StrCat(what, ": ", status.message()));
}

}  // namespace

ExperimentConfig ExperimentConfig::ForScale(RunScale scale) {
  ExperimentConfig config;
  config.sgd.mode = TrainMode::kSgd;
  config.sgd.noise_scale = 0.0;
  config.sgd.clip_norm = std::numeric_limits<double>::infinity();
  config.dpsgd.mode = TrainMode::kDpsgd;
  if (scale == RunScale::kDesk) {
    config.data.n = 20000;
    config.sgd.lot_size = 96;
    config.dpsgd.lot_size = 96;
  } else {
    config.data.n = 1000000;
    config.sgd.lot_size = 960;
    config.dpsgd.lot_size = 960;
  }
  return config;
}

absl::Status ExperimentConfig::Validate() const {
  RETURN_IF_ERROR(Prefix("data", data.Validate()));
  if (folds < 1) return absl::InvalidArgumentError("folds must be >= 1");
  if (data.n % folds != 0 || (data.n / folds) % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "data.n = ", data.n, " must split into ", folds,
        " folds of even size"));
  }
  RETURN_IF_ERROR(Prefix("sgd", sgd.Validate()));
  RETURN_IF_ERROR(Prefix("dpsgd", dpsgd.Validate()));
  if (sgd.mode != TrainMode::kSgd || dpsgd.mode != TrainMode::kDpsgd) {
    return absl::InvalidArgumentError("arm modes are fixed");
  }
  const int64_t fold_size = data.n / folds;
  if (sgd.lot_size > fold_size || dpsgd.lot_size > fold_size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lot sizes must not exceed the fold size ", fold_size));
  }
  // No sigmas means an SGD-only overfit run.
  RETURN_IF_ERROR(CheckSigmas(sigmas, "sigmas", /*allow_empty=*/true));
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!(alpha_step > 0.0 && alpha_step <= 0.1)) {
    return absl::InvalidArgumentError("alpha_step must lie in (0, 0.1]");
  }
  if (!(plateau_tol > 0.0)) {
    return absl::InvalidArgumentError("plateau_tol must be positive");
  }
  if (threads < 0) return absl::InvalidArgumentError("threads must be >= 0");

  const ConvergenceConfig& conv = convergence;
  if (conv.n_train <= 0 || conv.n_test <= 0 || conv.n_train % 2 != 0 ||
      conv.n_test % 2 != 0) {
    return absl::InvalidArgumentError(
        "convergence.n_train and convergence.n_test must be positive and even");
  }
  if (conv.epochs < 0) {
    return absl::InvalidArgumentError("convergence.epochs must be >= 0");
  }
  if (conv.eval_every <= 0) {
    return absl::InvalidArgumentError("convergence.eval_every must be > 0");
  }
  if (conv.sgd_lot_size <= 0 || conv.dpsgd_lot_size <= 0 ||
      conv.sgd_lot_size > conv.n_train || conv.dpsgd_lot_size > conv.n_train) {
    return absl::InvalidArgumentError(
        "convergence lot sizes must lie in [1, convergence.n_train]");
  }
  return CheckSigmas(conv.sigmas, "convergence.sigmas", /*allow_empty=*/false);
}

std::string ExperimentConfig::Serialize() const {
  std::string out;
  for (const Field& field : Fields()) {
    absl::StrAppend(&out, field.key.name, " = ", field.get(*this), "\n");
  }
  return out;
}

std::string ExperimentConfig::Hash() const {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : Serialize()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

absl::StatusOr<RunScale> ParseScale(absl::string_view text) {
  if (text == "desk") return RunScale::kDesk;
  if (text == "paper") return RunScale::kPaper;
  return absl::InvalidArgumentError(
      absl::StrCat("scale must be desk or paper, got '", text, "'"));
}

absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text,
                                             const ExperimentConfig& base) {
  ExperimentConfig config = base;
  std::map<std::string, int> seen;
  int line_number = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_number;
    line = line.substr(0, line.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected 'key = value'"));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    const Field* match = nullptr;
    for (const Field& field : Fields()) {
      if (field.key.name == key) match = &field;
    }
    if (match == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": unknown key '", key, "'"));
    }
    if (const auto [it, fresh] = seen.emplace(std::string(key), line_number);
        !fresh) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": key '", key,
                       "' already set on line ", it->second));
    }
    RETURN_IF_ERROR(Prefix(absl::StrCat("line ", line_number, ": ", key),
                           match->set(value, config)));
  }
  RETURN_IF_ERROR(config.Validate());
  return config;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path,
                                            const ExperimentConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::InvalidArgumentError(absl::StrCat("cannot read ", path));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<ExperimentConfig> config = ParseConfig(buffer.str(), base);
  if (!config.ok()) return Prefix(path, config.status());
  return config;
}

absl::StatusOr<std::vector<double>> ParseSigmaList(absl::string_view text) {
  std::vector<double> sigmas;
  for (absl::string_view item : absl::StrSplit(text, ',')) {
    item = absl::StripAsciiWhitespace(item);
    ASSIGN_OR_RETURN(const double sigma, ParseReal(item));
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      return absl::InvalidArgumentError(
          absl::StrCat("sigma must be finite and non-negative, got ", item));
    }
    sigmas.push_back(sigma);
  }
  return sigmas;
}

const std::vector<ConfigKey>& ConfigSchema() {
  static const std::vector<ConfigKey>* schema = [] {
    auto* keys = new std::vector<ConfigKey>;
    for (const Field& field : Fields()) keys->push_back(field.key);
    return keys;
  }();
  return *schema;
}

}  // namespace dpgen
