// Copyright 2026 The fsed Authors.
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

#ifndef FSED_ERROR_H_
#define FSED_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsed {

enum class ErrorCode {
  kEmptyAudio,
  kTooShort,
  kInvalidBand,
  kShapeMismatch,
  kSilentSource,
  kUnknownClass,
  kInsufficientClasses,
  kInvalidConfig,
  kCacheMismatch,
  kNonFiniteGradient,
  kCorruptCheckpoint,
  kInvalidDistance,
  kEmptyBatch,
  kLeakage,
  kEmptySupport,
  kEmptyDevSet,
  kInvalidCollar,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as fsed::Error. The code is stable and is what
// callers (and the CLI's exit-code mapping) should switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kInvalidBand: return "InvalidBand";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kSilentSource: return "SilentSource";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kInsufficientClasses: return "InsufficientClasses";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kCacheMismatch: return "CacheMismatch";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kInvalidDistance: return "InvalidDistance";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kLeakage: return "LeakageError";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kEmptyDevSet: return "EmptyDevSet";
    case ErrorCode::kInvalidCollar: return "InvalidCollar";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace fsed

#endif  // FSED_ERROR_H_
