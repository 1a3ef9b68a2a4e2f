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

#ifndef GKT_TRANSFER_HPP
#define GKT_TRANSFER_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gkt/clm.hpp"
#include "gkt/trainer.hpp"

namespace gkt {

enum class TransferMode { kTeacherDriven, kStudentDriven };

TransferMode parse_transfer_mode(const std::string& s);  // "td" | "sd"
std::string to_string(TransferMode m);

struct GktConfig {
  TransferMode mode = TransferMode::kStudentDriven;
  // Characters the student generates per cycle (student-driven).
  std::size_t lot_chars = 20000;
  std::size_t cycles = 1;
  // Total characters the teacher generates (teacher-driven).
  std::size_t budget_chars = 100000;
  double temperature = 1.0;
  // Passes the student makes over each lot before it is discarded.
  std::size_t passes_per_lot = 1;
  // A sentence is cut with a forced EOS at this length.
  std::size_t max_sentence = 500;
  // Lockstep samplers used for teacher-driven generation.
  std::size_t generation_streams = 32;
  TrainConfig train;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Held-out sets the report is computed on. Empty sets are skipped (NaN).
struct EvalSets {
  SymbolSeq full;
  SymbolSeq private_set;
  SymbolSeq public_set;
};

struct OovProbeSpec {
  std::vector<std::string> words;
  // Context prefixes each word is scored after (an EOS is prepended).
  std::vector<SymbolSeq> contexts;
  std::size_t sample_chars = 100000;
  std::uint64_t seed = 7;
};

struct OovScore {
  std::string word;
  double mean_log2 = 0.0;    // per symbol, averaged over contexts
  std::size_t presence = 0;  // whole-word occurrences in the sample
};

/// Per-word mean log2-probability of the word's symbols after each
/// context, plus its whole-word count in a seeded sample of the model.
std::vector<OovScore> oov_probe(const ModelParams& params, const OovProbeSpec& spec);

// Whole-word occurrences of `word` in `text` (SPACE/EOS/PERIOD/APOSTROPHE delimit).
std::size_t count_word(const SymbolSeq& text, const std::string& word);

struct TransferRecord {
  std::size_t cycle = 0;
  std::uint64_t frames = 0;
  std::uint64_t chars_generated = 0;
  double bpc_full = std::numeric_limits<double>::quiet_NaN();
  double bpc_private = std::numeric_limits<double>::quiet_NaN();
  double bpc_public = std::numeric_limits<double>::quiet_NaN();
  bool end_of_cycle = false;
  std::vector<OovScore> oov;
};

struct TransferReport {
  std::vector<TransferRecord> records;
  std::size_t forced_eos = 0;

  // Records closing a cycle (plus the initial cycle-0 record).
  std::vector<TransferRecord> cycle_records() const;
  void write_csv(const std::string& path) const;
};

inline constexpr const char* kTransferCsvHeader =
    "cycle,frames,chars_generated,bpc_full,bpc_private,bpc_public,end_of_cycle,oov_mean_log2,"
    "oov_presence";

struct TransferResult {
  ModelParams student;
  TransferReport report;
  OptimizerState optimizer;
  std::uint64_t frames = 0;
  std::uint64_t updates = 0;
};

// Seed of the lot generated in a given cycle (1-based).
std::uint64_t lot_seed(std::uint64_t base, std::size_t cycle);

/// One lot of student text, sampled with the config's temperature and
/// sentence cap. Labels are the student's own sampling distributions.
SampledText generate_lot(const ModelParams& generator, std::size_t chars, std::uint64_t seed,
                         const GktConfig& cfg);

// Training config for consuming one lot: passes_per_lot passes, last snapshot.
TrainConfig lot_train_config(const GktConfig& cfg);

/// Teacher-driven transfer: the teacher samples budget_chars with its
/// sampling distributions as soft labels; the student trains on that fixed
/// set for cfg.train.max_updates updates.
TransferResult run_tdgkt(const ModelParams& teacher, ModelParams student, const GktConfig& cfg,
                         const EvalSets& eval, const OovProbeSpec* probe = nullptr);

/// Student-driven transfer: each cycle the current student samples a lot,
/// the teacher labels exactly that text, and the student trains on it.
/// The student should be pretrained.
TransferResult run_sdgkt(const ModelParams& teacher, ModelParams student, const GktConfig& cfg,
                         const EvalSets& eval, const OovProbeSpec* probe = nullptr);

}  // namespace gkt

#endif  // GKT_TRANSFER_HPP
