// Copyright 2026 The Storyloop Authors.
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

#include "storyloop/error.hpp"

namespace storyloop {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kInconsistentRaterCount: return "InconsistentRaterCount";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnknownSegment: return "UnknownSegment";
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTooFewStories: return "TooFewStories";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNarratorTarget: return "NarratorTarget";
    case ErrorCode::kNoKnownTokens: return "NoKnownTokens";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kTooFewDocuments: return "TooFewDocuments";
    case ErrorCode::kRowOutOfRange: return "RowOutOfRange";
    case ErrorCode::kBackendUnreachable: return "BackendUnreachable";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kNotReady: return "NotReady";
    case ErrorCode::kUnknownModel: return "UnknownModel";
    case ErrorCode::kUnknownStory: return "UnknownStory";
    case ErrorCode::kUnknownSuggestion: return "UnknownSuggestion";
    case ErrorCode::kAlreadyPublished: return "AlreadyPublished";
    case ErrorCode::kRatingOutOfRange: return "RatingOutOfRange";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace storyloop
