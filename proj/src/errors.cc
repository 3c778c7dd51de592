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

#include "dpgen/errors.h"

#include "absl/strings/str_cat.h"

namespace dpgen {

absl::Status OverflowError(int layer) {
  return absl::AbortedError(
      absl::StrCat("non-finite pre-activation in layer ", layer));
}

absl::Status ExplosionError(absl::string_view what) {
  return absl::AbortedError(absl::StrCat("gradient explosion: ", what));
}

absl::Status OutOfRegimeError(absl::string_view what) {
  return absl::OutOfRangeError(what);
}

}  // namespace dpgen
