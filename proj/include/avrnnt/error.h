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

#ifndef AVRNNT_ERROR_H_
#define AVRNNT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace avrnnt {

enum class ErrorCode {
  kEmptyInput,
  kUnsupportedSampleRate,
  kUnsupportedFrameRate,
  kInvalidFilterSpec,
  kShapeError,
  kConfigError,
  kInvalidSwitchState,
  kInvalidLabel,
  kImpossibleAlignment,
  kNonFiniteGradient,
  kDivergence,
  kDegenerateSnr,
  kUndefinedCi,
  kMissingMetadata,
  kIncompatibleCheckpoint,
  kFormatError,
  kIoError,
  kUsage,
};

std::string_view error_code_name(ErrorCode code);

// Every contract violation in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const { return code_; }
  // Message without the code prefix, for re-wrapping with more context.
  const std::string &detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Process exit codes for the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

int exit_code_for(ErrorCode code);

}  // namespace avrnnt

#endif  // AVRNNT_ERROR_H_
