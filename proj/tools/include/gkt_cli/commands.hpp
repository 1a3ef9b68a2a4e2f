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

#ifndef GKT_CLI_COMMANDS_HPP
#define GKT_CLI_COMMANDS_HPP

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gkt_cli/manifest.hpp"
#include "gkt_cli/settings.hpp"

namespace gkt::cli {

/// Per-invocation bookkeeping: which files a command read and wrote.
class RunContext {
 public:
  RunContext(Settings& settings, std::ostream& out, std::ostream& err)
      : settings(settings), out(out), err(err) {}

  Settings& settings;
  std::ostream& out;
  std::ostream& err;

  // Path setting that must name a readable file; hashed into the manifest.
  std::string input(const std::string& key);
  // Same, but an unset or empty key yields "".
  std::string optional_input(const std::string& key);
  // A file read under a derived name (e.g. inside a data directory).
  void record_input(const std::string& name, const std::string& path);

  std::string output(const std::string& key, const std::string& fallback = "");
  std::string optional_output(const std::string& key);
  std::string output_dir(const std::string& key, const std::string& fallback = "");
  // A file written inside the directory named by `dir_key`.
  std::string produced(const std::string& dir_key, const std::string& relative);

  void result(const std::string& name, const std::string& value) { results_[name] = value; }
  void set_default_manifest(const std::string& path) { default_manifest_ = path; }

  RunManifest finish(const std::string& command, const std::vector<std::string>& argv) const;
  const std::string& default_manifest() const { return default_manifest_; }
  void register_output_key(const std::string& key, const std::string& path) { output_keys_[key] = path; }

 private:
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  std::map<std::string, std::string> output_keys_;
  std::map<std::string, std::string> dirs_;
  std::map<std::string, std::string> results_;
  std::string default_manifest_ = "gkt_run.manifest.json";
};

using Command = std::function<void(RunContext&)>;

// prepare, train, generate, gkt, federate, eval
const std::map<std::string, Command>& commands();

struct RunOutcome {
  RunManifest manifest;
  std::string manifest_path;
};

/// Runs one command against fully merged settings and writes its manifest
/// (settings key run.manifest, or a path next to the primary output).
RunOutcome execute(const std::string& command, Settings settings, const std::vector<std::string>& argv,
                   std::ostream& out, std::ostream& err);

struct ReplayReport {
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;
  std::vector<std::string> missing;
  std::string manifest_path;
  bool ok() const { return mismatched.empty() && missing.empty(); }
};

/// Re-executes the command recorded in a manifest, optionally redirecting
/// every output into `out_dir`, and compares artifact hashes. Inputs must
/// still hash to their recorded values.
ReplayReport replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                    std::ostream& err);

}  // namespace gkt::cli

#endif  // GKT_CLI_COMMANDS_HPP
