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

#ifndef GKT_HASH_HPP
#define GKT_HASH_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace gkt {

// 64-bit FNV-1a. Content fingerprints only; not a cryptographic hash.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view s);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view s);
std::string to_hex(std::uint64_t v);

// Hash of a file's bytes; throws DataError if unreadable.
std::string hash_file(const std::string& path);

}  // namespace gkt

#endif  // GKT_HASH_HPP
