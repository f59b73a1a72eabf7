// Copyright 2026 The roadloc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace roadloc {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateProjection,
  kDegenerateBackprojection,
  kNoConvergence,
  kInsufficientMarks,
  kEmptyInput,
  kDegenerateRect,
  kOutOfBounds,
  kShapeMismatch,
  kNoGroundTruth,
  kNonpositiveTime,
  kNonpositiveGt,
  kParseError,
  kSchemaVersionError,
  kSingularHomography,
  kInvariantViolation,
  kIoError,
};

const char* to_string(ErrorCode code);

// Library-wide exception. `index()` carries the offending element (vertex,
// point, object) when the failure is tied to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace roadloc
