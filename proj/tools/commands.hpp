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

#ifndef SUBDPP_TOOLS_COMMANDS_HPP_
#define SUBDPP_TOOLS_COMMANDS_HPP_

#include <exception>

#include "CLI11.hpp"

namespace subdpp::cli {

inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Adds generate, fit, eval, sample, summarize and neighbors to `app`.
/// Subcommand callbacks throw subdpp::Error on failure.
void register_commands(CLI::App& app);

/// 3 for numerical failures, 2 for configuration and input errors, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace subdpp::cli

#endif  // SUBDPP_TOOLS_COMMANDS_HPP_
