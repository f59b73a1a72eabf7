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

#include "roadloc/error.hpp"

namespace roadloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateProjection: return "DegenerateProjection";
    case ErrorCode::kDegenerateBackprojection: return "DegenerateBackprojection";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kInsufficientMarks: return "InsufficientMarks";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDegenerateRect: return "DegenerateRect";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNoGroundTruth: return "NoGroundTruth";
    case ErrorCode::kNonpositiveTime: return "NonpositiveTime";
    case ErrorCode::kNonpositiveGt: return "NonpositiveGt";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaVersionError: return "SchemaVersionError";
    case ErrorCode::kSingularHomography: return "SingularHomography";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace roadloc
