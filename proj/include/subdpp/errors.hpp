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

#ifndef SUBDPP_ERRORS_HPP_
#define SUBDPP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace subdpp {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kOutOfDomain,
  kSingularMatrix,
  kNotStrictlyValid,
  kDegenerateParameter,
  kSingularObservation,
  kGroundSetTooLarge,
  kInfeasibleSize,
  kUnembeddedWord,
  kEmptyAfterFiltering,
  kRankDeficientSelection,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Numerical failures (as opposed to bad input or configuration).
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const char* what) {
  if (!condition) fail(kind, what);
}

}  // namespace subdpp

#endif  // SUBDPP_ERRORS_HPP_
