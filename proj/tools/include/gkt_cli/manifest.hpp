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

#ifndef GKT_CLI_MANIFEST_HPP
#define GKT_CLI_MANIFEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gkt::cli {

inline constexpr int kManifestSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct Artifact {
  std::string path;
  std::string hash;  // artifact_hash() of the file
  bool operator==(const Artifact&) const = default;
};

/// Everything needed to re-run a command: the fully resolved settings,
/// the seeds among them, and hashes of every file read and written.
struct RunManifest {
  int schema = kManifestSchema;
  std::string tool_version = kToolVersion;
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, Artifact> inputs;
  std::map<std::string, Artifact> outputs;
  // Settings keys naming output files or directories (rewritten on replay).
  std::map<std::string, std::string> output_keys;
  std::map<std::string, std::string> results;

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

/// FNV-1a of a file's bytes. CSV files with a wallclock_s column are
/// hashed with that column removed, so timing noise does not change the
/// artifact identity.
std::string artifact_hash(const std::string& path);

}  // namespace gkt::cli

#endif  // GKT_CLI_MANIFEST_HPP
