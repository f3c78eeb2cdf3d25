// Copyright 2026 The FILM Simulator Authors.
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

#include "film/error.h"

namespace film {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidCorpus:
      return "InvalidCorpus";
    case ErrorCode::kSentenceTooLong:
      return "SentenceTooLong";
    case ErrorCode::kBatchTooLarge:
      return "BatchTooLarge";
    case ErrorCode::kCheckpointMismatch:
      return "CheckpointMismatch";
    case ErrorCode::kSequenceTooLong:
      return "SequenceTooLong";
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kNumericalFailure:
      return "NumericalFailure";
    case ErrorCode::kShapeError:
      return "ShapeError";
    case ErrorCode::kEmptyBag:
      return "EmptyBag";
    case ErrorCode::kEmptyPrompts:
      return "EmptyPrompts";
    case ErrorCode::kNoEntities:
      return "NoEntities";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kConfigError:
      return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace film
