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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gkt/errors.hpp"
#include "gkt/transfer.hpp"
#include "oracle.hpp"
#include "synthetic_corpus.hpp"

namespace gkt {
namespace {

SymbolSeq small_corpus(std::size_t chars, std::uint64_t seed, double private_fraction = 0.14) {
  testing::SyntheticOptions o;
  o.target_chars = chars;
  o.seed = seed;
  o.private_fraction = private_fraction;
  return preprocess(testing::synthetic_corpus(o));
}

TrainConfig quick_train(std::size_t updates) {
  TrainConfig t;
  t.batch_streams = 8;
  t.bptt_window = 32;
  t.max_updates = updates;
  t.eval_every = 0;
  return t;
}

GktConfig quick_gkt(TransferMode mode) {
  GktConfig g;
  g.mode = mode;
  g.lot_chars = 2000;
  g.cycles = 3;
  g.budget_chars = 4000;
  g.train = quick_train(20);
  g.train.eval_every = 5;
  g.generation_streams = 4;
  g.seed = 5;
  return g;
}

TEST(TransferConfig, Validation) {
  GktConfig g = quick_gkt(TransferMode::kStudentDriven);
  EXPECT_NO_THROW(g.validate());
  g.cycles = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  g = quick_gkt(TransferMode::kTeacherDriven);
  g.budget_chars = 100;
  EXPECT_THROW(g.validate(), ConfigError);
  g = quick_gkt(TransferMode::kStudentDriven);
  g.temperature = 0.0;
  EXPECT_THROW(g.validate(), ConfigError);
  EXPECT_EQ(parse_transfer_mode("td"), TransferMode::kTeacherDriven);
  EXPECT_EQ(parse_transfer_mode("sd"), TransferMode::kStudentDriven);
  EXPECT_THROW(parse_transfer_mode("xx"), ConfigError);
}

TEST(LotSeed, DistinctPerCycleAndBase) {
  EXPECT_EQ(lot_seed(1, 1), lot_seed(1, 1));
  EXPECT_NE(lot_seed(1, 1), lot_seed(1, 2));
  EXPECT_NE(lot_seed(1, 1), lot_seed(2, 1));
}

TEST(CountWord, WholeWordsOnly) {
  const SymbolSeq s = encode_canonical("IN JANUARY JANUARYS JANUARY'S\nJANUARY.\nXJANUARY\n");
  EXPECT_EQ(count_word(s, "JANUARY"), 3u);
  EXPECT_EQ(count_word(s, "MAY"), 0u);
}

TEST(OovProbe, UniformModelScoresLog2Of30) {
  const ModelParams p = ModelParams::zeros(ModelSpec{4, 1, 30});
  OovProbeSpec spec;
  spec.words = {"A", "JANUARY"};
  spec.contexts = {encode_canonical("IN "), encode_canonical("SALES ROSE ")};
  spec.sample_chars = 2000;
  const auto scores = oov_probe(p, spec);
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_NEAR(scores[0].mean_log2, -std::log2(30.0), 1e-12);
  EXPECT_NEAR(scores[1].mean_log2, -std::log2(30.0), 1e-12);
  EXPECT_EQ(scores[1].presence, 0u);
}

TEST(Tdgkt, ProducesOneGenerationCycleAndRecords) {
  const SymbolSeq corpus = small_corpus(20000, 1);
  const ModelParams teacher = train(ModelParams::init(ModelSpec{12, 1, 30}, 1),
                                    TrainingStream::hard(corpus), quick_train(40)).params;
  GktConfig cfg = quick_gkt(TransferMode::kTeacherDriven);
  cfg.budget_chars = cfg.lot_chars;
  EvalSets eval;
  eval.full = SymbolSeq(corpus.begin(), corpus.begin() + 1000);
  const TransferResult r = run_tdgkt(teacher, ModelParams::init(ModelSpec{8, 1, 30}, 2), cfg, eval);
  ASSERT_GE(r.report.records.size(), 2u);
  EXPECT_EQ(r.report.records.front().cycle, 0u);
  std::set<std::size_t> cycles;
  for (const auto& rec : r.report.records) {
    if (rec.cycle > 0) cycles.insert(rec.cycle);
    EXPECT_FALSE(std::isnan(rec.bpc_full));
    EXPECT_TRUE(std::isnan(rec.bpc_private));
  }
  EXPECT_EQ(cycles.size(), 1u);
  EXPECT_EQ(r.updates, 20u);
  EXPECT_LT(r.report.records.back().bpc_full, r.report.records.front().bpc_full);
}

TEST(Sdgkt, DeterministicAndRecordsEveryCycle) {
  const SymbolSeq corpus = small_corpus(20000, 2);
  const ModelParams teacher = train(ModelParams::init(ModelSpec{12, 1, 30}, 1),
                                    TrainingStream::hard(corpus), quick_train(40)).params;
  const ModelParams student = train(ModelParams::init(ModelSpec{8, 1, 30}, 3),
                                    TrainingStream::hard(corpus), quick_train(10)).params;
  const GktConfig cfg = quick_gkt(TransferMode::kStudentDriven);
  EvalSets eval;
  eval.private_set = SymbolSeq(corpus.begin(), corpus.begin() + 800);
  const TransferResult a = run_sdgkt(teacher, student, cfg, eval);
  const TransferResult b = run_sdgkt(teacher, student, cfg, eval);
  EXPECT_EQ(a.student.flatten(), b.student.flatten());
  const auto cyc = a.report.cycle_records();
  ASSERT_EQ(cyc.size(), 4u);
  for (std::size_t c = 0; c < cyc.size(); ++c) {
    EXPECT_EQ(cyc[c].cycle, c);
    EXPECT_EQ(cyc[c].chars_generated, c * cfg.lot_chars);
  }
  // One pass per lot: 2000 chars over 8 streams of 250 -> 8 windows of 32 (last 26).
  EXPECT_EQ(a.updates, 3u * 8u);
  EXPECT_EQ(a.frames, 3u * 2000u);
  EXPECT_EQ(a.optimizer.steps, a.updates);
}

TEST(Sdgkt, LrZeroLeavesStudentUnchanged) {
  const SymbolSeq corpus = small_corpus(10000, 3);
  const ModelParams teacher = ModelParams::init(ModelSpec{8, 1, 30}, 1);
  const ModelParams student = ModelParams::init(ModelSpec{8, 1, 30}, 2);
  GktConfig cfg = quick_gkt(TransferMode::kStudentDriven);
  cfg.train.lr = 0.0;
  const TransferResult r = run_sdgkt(teacher, student, cfg, EvalSets{});
  EXPECT_EQ(r.student.flatten(), student.flatten());
}

TEST(TransferReport, CsvHeaderMatches) {
  TransferReport rep;
  TransferRecord r;
  r.end_of_cycle = true;
  r.bpc_full = 1.5;
  rep.records.push_back(r);
  const auto path = (std::filesystem::temp_directory_path() / "gkt_transfer.csv").string();
  rep.write_csv(path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, kTransferCsvHeader);
  EXPECT_EQ(row, "0,0,0,1.5,,,1,,");
}

}  // namespace
}  // namespace gkt
