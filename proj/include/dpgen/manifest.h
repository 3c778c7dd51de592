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

// manifest.json: what a run was configured with and what it wrote. The file
// is written when the run starts and rewritten on every Write() call; all
// methods are safe to call from several threads.

#ifndef DPGEN_MANIFEST_H_
#define DPGEN_MANIFEST_H_

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "dpgen/config.h"
#include "dpgen/privacy.h"
#include "dpgen/random.h"

namespace dpgen {

struct ManifestPrivacyEntry {
  std::string run;
  PrivacyEvent event;
  double delta = 0.0;
  // Empty when the accountant could not bound the event.
  std::string epsilon;
  std::string note;
};

class RunManifest {
 public:
  // `dir` is the output directory; the manifest lives at dir/manifest.json.
  RunManifest(std::string dir, std::string command,
              const ExperimentConfig& config);

  const std::string& dir() const { return dir_; }

  void AddStream(const std::string& name, const RandomStream& stream);
  // `relative_path` is relative to dir().
  void AddOutput(const std::string& relative_path);
  void AddPrivacy(ManifestPrivacyEntry entry);
  void AddNote(const std::string& note);
  void SetStatus(const std::string& status);

  absl::Status Write();

  // Records the final status and wall-clock time, checks that every listed
  // output exists and writes the manifest one last time.
  absl::Status Finish(const absl::Status& run_status);

  std::vector<std::string> outputs() const;

 private:
  absl::Status WriteLocked();

  const std::string dir_;
  const std::string command_;
  const std::string config_hash_;
  const std::string config_text_;
  const uint64_t seed_;
  const std::chrono::steady_clock::time_point start_;
  const int64_t started_unix_;

  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> streams_;
  std::vector<std::string> outputs_;
  std::vector<ManifestPrivacyEntry> privacy_;
  std::vector<std::string> notes_;
  std::string status_ = "running";
  double wall_seconds_ = 0.0;
};

}  // namespace dpgen

#endif  // DPGEN_MANIFEST_H_
