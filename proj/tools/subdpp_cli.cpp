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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "subdpp/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Low-rank determinantal point processes: generate, fit, evaluate, sample, summarize"};
  app.set_version_flag("--version", SUBDPP_VERSION);
  app.require_subcommand(1);
  subdpp::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : subdpp::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "subdpp: " << e.what() << "\n";
    return subdpp::cli::exit_code_for(e);
  }
  return 0;
}
