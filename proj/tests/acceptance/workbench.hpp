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

#ifndef GKT_TESTS_ACCEPTANCE_WORKBENCH_HPP
#define GKT_TESTS_ACCEPTANCE_WORKBENCH_HPP

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gkt/corpus.hpp"
#include "gkt/federation.hpp"
#include "gkt/transfer.hpp"

namespace gkt::acceptance {

/// Desk-scale experiment settings shared by all criteria.
struct Setup {
  std::size_t corpus_chars = 1050000;
  std::uint64_t corpus_seed = 2026;
  std::size_t corpus_names = 4000;
  Fractions fractions{0.94, 0.03, 0.03};
  // Validation prefix used for frequent intermediate evaluations.
  std::size_t probe_chars = 16000;

  ModelSpec teacher_spec{128, 2, kVocabSize};
  ModelSpec student_spec{64, 2, kVocabSize};
  TrainConfig teacher_train;
  TrainConfig student_train;

  // Fine-tuning a pretrained student on teacher labels (single teacher and federation).
  TrainConfig transfer_train;
  double sample_temperature = 0.7;

  // Multi-cycle student-driven transfer.
  std::size_t lot_chars = 20000;
  std::size_t cycles = 100;

  std::size_t devices = 10;
  TrainConfig device_train;
  std::size_t fed_rounds = 20;
  std::size_t fed_patience = 5;
  std::size_t fed_lot_chars = 20000;

  Setup();
};

struct Data {
  SymbolSeq corpus;
  std::string corpus_hash;
  CorpusSplit split;
  PrivatePartition train;
  EvalSets valid;
  EvalSets test;
  SymbolSeq valid_probe;          // prefix of valid.full
  SymbolSeq valid_private_probe;  // prefix of valid.private_set
  std::vector<SymbolSeq> shards;  // train private sentences, one per device
};

struct FederationRun {
  FederationResult result;
  double seconds = 0.0;
};

class Workbench {
 public:
  Workbench(Setup setup, std::string cache_dir, std::string out_dir, std::ostream* log);

  // Directory for curve CSVs; empty disables them.
  const std::string& out_dir() const { return out_dir_; }

  const Setup& setup() const { return setup_; }
  const Data& data();

  // 128x2 trained on the full training split.
  const ModelParams& teacher();
  // 64x2 trained on public training sentences only.
  const ModelParams& public_student();
  // Public student copies fine-tuned on one private shard each.
  const std::vector<Device>& devices();
  // Federation from the public student with the fine-tuned devices.
  const FederationRun& federation(TransferMode mode, bool quantize);
  FederationConfig federation_config(TransferMode mode, bool quantize) const;

  // Path of `file` inside the cache directory; empty when caching is off.
  std::string cache_file(const std::string& file) const;

  /// Loads `name` from the cache directory or trains it with `make`.
  ModelParams cached(const std::string& name, const std::function<ModelParams()>& make);

  void note(const std::string& line);
  double elapsed() const;

 private:
  Setup setup_;
  std::string cache_dir_;
  std::string out_dir_;
  std::ostream* log_;
  std::optional<Data> data_;
  std::optional<ModelParams> teacher_;
  std::optional<ModelParams> public_student_;
  std::optional<std::vector<Device>> devices_;
  std::map<std::pair<int, bool>, FederationRun> federations_;
  double start_;
};

// Stable text fingerprint of a training configuration (cache keys).
std::string fingerprint(const TrainConfig& c);

double now_seconds();

}  // namespace gkt::acceptance

#endif  // GKT_TESTS_ACCEPTANCE_WORKBENCH_HPP
