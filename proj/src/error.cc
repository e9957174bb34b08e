// Copyright 2026 The avrnnt Authors.
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

#include "avrnnt/error.h"

namespace avrnnt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnsupportedSampleRate: return "UnsupportedSampleRate";
    case ErrorCode::kUnsupportedFrameRate: return "UnsupportedFrameRate";
    case ErrorCode::kInvalidFilterSpec: return "InvalidFilterSpec";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInvalidSwitchState: return "InvalidSwitchState";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kImpossibleAlignment: return "ImpossibleAlignment";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kDegenerateSnr: return "DegenerateSnr";
    case ErrorCode::kUndefinedCi: return "UndefinedCi";
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUsage: return "Usage";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kConfigError:
      return kExitUsage;
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kDivergence:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

}  // namespace avrnnt
