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

#include "dpgen/manifest.h"

#include <filesystem>
#include <fstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "fmt/format.h"
#include "json.hpp"

namespace dpgen {

RunManifest::RunManifest(std::string dir, std::string command,
                         const ExperimentConfig& config)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      config_hash_(config.Hash()),
      config_text_(config.Serialize()),
      seed_(config.seed),
      start_(std::chrono::steady_clock::now()),
      started_unix_(std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count()) {}

void RunManifest::AddStream(const std::string& name,
                            const RandomStream& stream) {
  std::lock_guard<std::mutex> lock(mu_);
  streams_.emplace_back(
      name, fmt::format("{} id={:016x}", stream.DebugString(), stream.id()));
}

void RunManifest::AddOutput(const std::string& relative_path) {
  std::lock_guard<std::mutex> lock(mu_);
  outputs_.push_back(relative_path);
}

void RunManifest::AddPrivacy(ManifestPrivacyEntry entry) {
  std::lock_guard<std::mutex> lock(mu_);
  privacy_.push_back(std::move(entry));
}

void RunManifest::AddNote(const std::string& note) {
  std::lock_guard<std::mutex> lock(mu_);
  notes_.push_back(note);
}

void RunManifest::SetStatus(const std::string& status) {
  std::lock_guard<std::mutex> lock(mu_);
  status_ = status;
}

std::vector<std::string> RunManifest::outputs() const {
  std::lock_guard<std::mutex> lock(mu_);
  return outputs_;
}

absl::Status RunManifest::Write() {
  std::lock_guard<std::mutex> lock(mu_);
  return WriteLocked();
}

absl::Status RunManifest::Finish(const absl::Status& run_status) {
  std::lock_guard<std::mutex> lock(mu_);
  wall_seconds_ = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
  status_ = run_status.ok() ? "ok" : std::string(run_status.ToString());
  std::vector<std::string> missing;
  for (const std::string& output : outputs_) {
    if (!std::filesystem::exists(std::filesystem::path(dir_) / output)) {
      missing.push_back(output);
    }
  }
  if (!missing.empty()) {
    status_ += absl::StrCat("; missing outputs: ", absl::StrJoin(missing, ", "));
  }
  absl::Status written = WriteLocked();
  if (!written.ok()) return written;
  if (!missing.empty()) {
    return absl::InternalError(absl::StrCat("listed outputs are missing: ",
                                            absl::StrJoin(missing, ", ")));
  }
  return absl::OkStatus();
}

absl::Status RunManifest::WriteLocked() {
  nlohmann::ordered_json json;
  json["command"] = command_;
  json["config_hash"] = config_hash_;
  json["seed"] = seed_;
  json["config"] = config_text_;
  json["status"] = status_;
  json["started_unix"] = started_unix_;
  json["wall_seconds"] = wall_seconds_;
  json["streams"] = nlohmann::ordered_json::object();
  for (const auto& [name, description] : streams_) {
    json["streams"][name] = description;
  }
  json["outputs"] = outputs_;
  json["privacy"] = nlohmann::ordered_json::array();
  for (const ManifestPrivacyEntry& entry : privacy_) {
    nlohmann::ordered_json item;
    item["run"] = entry.run;
    item["sigma"] = entry.event.sigma;
    item["sampling_rate"] = entry.event.sampling_rate;
    item["steps"] = entry.event.steps;
    item["delta"] = entry.delta;
    item["epsilon"] = entry.epsilon;
    if (!entry.note.empty()) item["note"] = entry.note;
    json["privacy"].push_back(std::move(item));
  }
  json["notes"] = notes_;

  const std::filesystem::path path =
      std::filesystem::path(dir_) / "manifest.json";
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      return absl::UnavailableError(absl::StrCat("cannot open ", tmp.string()));
    }
    out << json.dump(2) << "\n";
    out.flush();
    if (!out) {
      return absl::DataLossError(
          absl::StrCat("write failed for ", tmp.string()));
    }
  }
  std::error_code error;
  std::filesystem::rename(tmp, path, error);
  if (error) {
    return absl::UnavailableError(
        absl::StrCat("cannot rename manifest: ", error.message()));
  }
  return absl::OkStatus();
}

}  // namespace dpgen
