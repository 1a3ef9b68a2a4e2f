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

#include "gkt/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <string_view>

#include "gkt/bytes.hpp"
#include "gkt/errors.hpp"

namespace gkt {

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.check_shapes();
  const ModelSpec& spec = ckpt.params.spec;
  ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 5));
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(spec.cells));
  w.u32(static_cast<std::uint32_t>(spec.layers));
  w.u32(static_cast<std::uint32_t>(spec.vocab_size));
  w.u64(Vocab::ordering_hash());
  w.u64(ckpt.frames_trained);
  w.u64(ckpt.updates);
  w.u32(static_cast<std::uint32_t>(ckpt.seed_lineage.size()));
  for (auto s : ckpt.seed_lineage) w.u64(s);
  const std::size_t n = ckpt.params.size();
  w.u64(n);
  ckpt.params.visit([&](const double* d, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) w.f64(d[i]);
  });
  if (ckpt.optimizer.has_value()) {
    const OptimizerState& opt = *ckpt.optimizer;
    if (opt.size() != n || opt.edx2.size() != n || opt.velocity.size() != n) {
      throw DimensionError("optimizer state does not match model size");
    }
    w.u8(1);
    w.u64(opt.steps);
    for (double v : opt.eg2) w.f64(v);
    for (double v : opt.edx2) w.f64(v);
    for (double v : opt.velocity) w.f64(v);
  } else {
    w.u8(0);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& context,
                             const ModelSpec* expected) {
  ByteReader r(bytes, context);
  auto magic = r.bytes(5);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 5) !=
      std::string_view(kCheckpointMagic, 5)) {
    throw DataError(context + ": not a GKTLM checkpoint (bad magic)");
  }
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw DataError(context + ": unsupported checkpoint version " + std::to_string(version));
  }
  ModelSpec spec;
  spec.cells = static_cast<int>(r.u32());
  spec.layers = static_cast<int>(r.u32());
  spec.vocab_size = static_cast<int>(r.u32());
  if (spec.cells < 1 || spec.layers < 1 || spec.cells > (1 << 20) || spec.layers > 1024 ||
      spec.vocab_size != kVocabSize) {
    throw DataError(context + ": corrupt model spec in header");
  }
  if (r.u64() != Vocab::ordering_hash()) {
    throw DataError(context + ": vocabulary ordering differs from this build");
  }
  if (expected != nullptr && !(*expected == spec)) {
    throw DimensionError(context + ": checkpoint is " + spec.to_string() + " but " +
                    expected->to_string() + " was expected");
  }
  Checkpoint ckpt;
  ckpt.frames_trained = r.u64();
  ckpt.updates = r.u64();
  const std::uint32_t lineage = r.u32();
  if (lineage > r.remaining() / 8) throw DataError(context + ": corrupt seed lineage");
  for (std::uint32_t k = 0; k < lineage; ++k) ckpt.seed_lineage.push_back(r.u64());

  ckpt.params = ModelParams::zeros(spec);
  const std::uint64_t n = r.u64();
  if (n != ckpt.params.size()) {
    throw DataError(context + ": parameter count " + std::to_string(n) + " does not match " +
                    spec.to_string());
  }
  ckpt.params.visit([&](double* d, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) d[i] = r.f64();
  });
  const std::uint8_t has_opt = r.u8();
  if (has_opt > 1) throw DataError(context + ": corrupt optimizer flag");
  if (has_opt == 1) {
    OptimizerState opt = OptimizerState::zeros(n);
    opt.steps = r.u64();
    for (auto& v : opt.eg2) v = r.f64();
    for (auto& v : opt.edx2) v = r.f64();
    for (auto& v : opt.velocity) v = r.f64();
    ckpt.optimizer = std::move(opt);
  }
  if (r.remaining() != 0) throw DataError(context + ": trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path, const ModelSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, path, expected);
}

}  // namespace gkt
