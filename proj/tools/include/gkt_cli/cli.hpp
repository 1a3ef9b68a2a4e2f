// Copyright 2026 The gkt-lm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GKT_CLI_CLI_HPP
#define GKT_CLI_CLI_HPP

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace gkt::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // anything else, including a replay hash mismatch
  kExitConfig = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

// Maps an in-flight exception to the documented exit code.
int exit_code_for(const std::exception_ptr& e);

/// Parses `args` (without the program name), runs the subcommand, and
/// returns its exit code. Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gkt::cli

#endif  // GKT_CLI_CLI_HPP
