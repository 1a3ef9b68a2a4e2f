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

#include "gkt_cli/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gkt/errors.hpp"
#include "gkt/hash.hpp"

namespace gkt::cli {
namespace {

using nlohmann::json;

json artifacts_to_json(const std::map<std::string, Artifact>& m) {
  json j = json::object();
  for (const auto& [k, a] : m) j[k] = {{"path", a.path}, {"fnv1a64", a.hash}};
  return j;
}

std::map<std::string, Artifact> artifacts_from_json(const json& j) {
  std::map<std::string, Artifact> m;
  for (const auto& [k, v] : j.items()) m[k] = {v.at("path").get<std::string>(), v.at("fnv1a64").get<std::string>()};
  return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void RunManifest::save(const std::string& path) const {
  json j;
  j["schema"] = schema;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  j["seeds"] = seeds;
  j["inputs"] = artifacts_to_json(inputs);
  j["outputs"] = artifacts_to_json(outputs);
  j["output_keys"] = output_keys;
  j["results"] = results;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  RunManifest m;
  try {
    m.schema = j.at("schema").get<int>();
    if (m.schema != kManifestSchema) {
      throw DataError(path + ": unsupported manifest schema " + std::to_string(m.schema));
    }
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.inputs = artifacts_from_json(j.at("inputs"));
    m.outputs = artifacts_from_json(j.at("outputs"));
    m.output_keys = j.at("output_keys").get<std::map<std::string, std::string>>();
    m.results = j.at("results").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed manifest: " + e.what());
  }
  return m;
}

std::string artifact_hash(const std::string& path) {
  if (path.size() < 4 || path.compare(path.size() - 4, 4, ".csv") != 0) return hash_file(path);
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::string header;
  std::getline(in, header);
  const auto columns = split_csv_line(header);
  std::ptrdiff_t skip = -1;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == "wallclock_s") skip = static_cast<std::ptrdiff_t>(i);
  }
  if (skip < 0) return hash_file(path);
  Fnv1a h;
  auto emit = [&](const std::string& line) {
    const auto cells = split_csv_line(line);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == skip) continue;
      h.update(cells[i]);
      h.update(",");
    }
    h.update("\n");
  };
  emit(header);
  std::string line;
  while (std::getline(in, line)) emit(line);
  return h.hex();
}

}  // namespace gkt::cli
