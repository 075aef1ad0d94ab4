// Copyright 2026 The subdpp Authors.
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

#include "subdpp/errors.hpp"

namespace subdpp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kOutOfDomain: return "OutOfDomain";
    case ErrorKind::kSingularMatrix: return "SingularMatrix";
    case ErrorKind::kNotStrictlyValid: return "NotStrictlyValid";
    case ErrorKind::kDegenerateParameter: return "DegenerateParameter";
    case ErrorKind::kSingularObservation: return "SingularObservation";
    case ErrorKind::kGroundSetTooLarge: return "GroundSetTooLarge";
    case ErrorKind::kInfeasibleSize: return "InfeasibleSize";
    case ErrorKind::kUnembeddedWord: return "UnembeddedWord";
    case ErrorKind::kEmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorKind::kRankDeficientSelection: return "RankDeficientSelection";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingularMatrix:
    case ErrorKind::kNotStrictlyValid:
    case ErrorKind::kDegenerateParameter:
    case ErrorKind::kSingularObservation:
    case ErrorKind::kRankDeficientSelection:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace subdpp
