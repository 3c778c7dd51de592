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

#ifndef DPGEN_ERRORS_H_
#define DPGEN_ERRORS_H_

#include "absl/status/status.h"
#include "absl/strings/string_view.h"

namespace dpgen {

// Numerical blow-ups (non-finite activations, gradients or parameters) are
// reported as kAborted so that callers can apply an explosion policy.
absl::Status OverflowError(int layer);
absl::Status ExplosionError(absl::string_view what);
inline bool IsExplosion(const absl::Status& status) {
  return absl::IsAborted(status);
}

// A privacy bound was requested outside the range where its closed form is
// valid (per-step epsilon >= 1).
absl::Status OutOfRegimeError(absl::string_view what);
inline bool IsOutOfRegime(const absl::Status& status) {
  return absl::IsOutOfRange(status);
}

}  // namespace dpgen

#endif  // DPGEN_ERRORS_H_
