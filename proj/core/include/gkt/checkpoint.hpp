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

#ifndef GKT_CHECKPOINT_HPP
#define GKT_CHECKPOINT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gkt/clm.hpp"
#include "gkt/trainer.hpp"

namespace gkt {

inline constexpr char kCheckpointMagic[] = "GKTLM";
inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Binary layout (little-endian):
///   magic "GKTLM" (5 bytes) | version u16
///   cells u32 | layers u32 | vocab u32 | vocab ordering hash u64
///   frames_trained u64 | updates u64
///   lineage count u32 | lineage seeds u64[count]
///   parameter count u64 | parameters f64[count] (ModelParams flattened order)
///   has optimizer u8 | if 1: steps u64, eg2 f64[count], edx2 f64[count],
///                          velocity f64[count]
struct Checkpoint {
  ModelParams params;
  std::uint64_t frames_trained = 0;
  std::uint64_t updates = 0;
  // Seeds of every run that produced these weights, oldest first.
  std::vector<std::uint64_t> seed_lineage;
  std::optional<OptimizerState> optimizer;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// `expected`, when given, must match the stored spec exactly.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& context,
                             const ModelSpec* expected = nullptr);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path, const ModelSpec* expected = nullptr);

}  // namespace gkt

#endif  // GKT_CHECKPOINT_HPP
