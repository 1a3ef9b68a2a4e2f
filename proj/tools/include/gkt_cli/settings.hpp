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

#ifndef GKT_CLI_SETTINGS_HPP
#define GKT_CLI_SETTINGS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gkt::cli {

/// Flat "section.key" -> value store. Later writes win, so loading the
/// config file first and then applying --set and dedicated flags gives
/// the documented precedence. Every typed read records the value it
/// resolved to (defaults included); that record is the run's config
/// snapshot.
class Settings {
 public:
  Settings() = default;
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  /// Reads an INI file: "[section]" headers and "key = value" lines.
  void load_ini(const std::string& path);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  // "section.key=value"
  void assign(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  // Keys that were provided but never read.
  std::vector<std::string> unused() const;

 private:
  const std::string* find(const std::string& key) const;
  std::string record(const std::string& key, const std::string& value) const;

  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace gkt::cli

#endif  // GKT_CLI_SETTINGS_HPP
