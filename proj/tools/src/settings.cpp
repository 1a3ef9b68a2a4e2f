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

#include "gkt_cli/settings.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>

#include "gkt/errors.hpp"

namespace gkt::cli {
namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  T v{};
  const char* end = raw.data() + raw.size();
  auto [ptr, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("setting " + key + " = '" + raw + "' is not a valid number");
  }
  return v;
}

}  // namespace

void Settings::load_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      values_[name] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(path + ": nested section under [" + name + "]");
      values_[name + "." + key] = leaf.data();
    }
  }
}

void Settings::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("expected section.key=value, got '" + assignment + "'");
  }
  values_[assignment.substr(0, eq)] = assignment.substr(eq + 1);
}

const std::string* Settings::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string Settings::record(const std::string& key, const std::string& value) const {
  resolved_[key] = value;
  return value;
}

std::string Settings::text(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return record(key, v ? *v : fallback);
}

std::string Settings::require(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr || v->empty()) throw ConfigError("missing required setting " + key);
  return record(key, *v);
}

std::size_t Settings::count(const std::string& key, std::size_t fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) {
    record(key, std::to_string(fallback));
    return fallback;
  }
  const auto n = parse_number<std::size_t>(key, *v);
  record(key, *v);
  return n;
}

std::uint64_t Settings::u64(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) {
    record(key, std::to_string(fallback));
    return fallback;
  }
  const auto n = parse_number<std::uint64_t>(key, *v);
  record(key, *v);
  return n;
}

double Settings::real(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fallback);
    record(key, std::string(buf, ptr));
    return fallback;
  }
  const double x = parse_number<double>(key, *v);
  if (!std::isfinite(x)) throw ConfigError("setting " + key + " must be finite");
  record(key, *v);
  return x;
}

bool Settings::flag(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) {
    record(key, fallback ? "true" : "false");
    return fallback;
  }
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
    record(key, *v);
    return true;
  }
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
    record(key, *v);
    return false;
  }
  throw ConfigError("setting " + key + " = '" + *v + "' is not a boolean");
}

std::vector<std::string> Settings::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (resolved_.count(k) == 0) out.push_back(k);
  }
  return out;
}

}  // namespace gkt::cli
