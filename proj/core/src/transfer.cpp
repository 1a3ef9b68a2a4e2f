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

#include "gkt/transfer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gkt/errors.hpp"
#include "gkt/rng.hpp"

namespace gkt {

TransferMode parse_transfer_mode(const std::string& s) {
  if (s == "td" || s == "teacher_driven" || s == "TDGKT") return TransferMode::kTeacherDriven;
  if (s == "sd" || s == "student_driven" || s == "SDGKT") return TransferMode::kStudentDriven;
  throw ConfigError("unknown transfer mode '" + s + "' (expected td or sd)");
}

std::string to_string(TransferMode m) {
  return m == TransferMode::kTeacherDriven ? "td" : "sd";
}

void GktConfig::validate() const {
  train.validate();
  if (cycles < 1) throw ConfigError("cycles must be at least 1");
  if (lot_chars < train.bptt_window) throw ConfigError("lot_chars must be at least bptt_window");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (passes_per_lot < 1) throw ConfigError("passes_per_lot must be at least 1");
  if (generation_streams < 1) throw ConfigError("generation_streams must be at least 1");
  if (mode == TransferMode::kTeacherDriven && budget_chars < lot_chars) {
    throw ConfigError("teacher-driven transfer needs budget_chars >= lot_chars");
  }
}

std::size_t count_word(const SymbolSeq& text, const std::string& word) {
  std::size_t hits = 0;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty() && cur == word) ++hits;
    cur.clear();
  };
  for (SymbolId id : text) {
    if (id < 26) {
      cur.push_back(static_cast<char>('A' + id));
    } else {
      flush();
    }
  }
  flush();
  return hits;
}

std::vector<OovScore> oov_probe(const ModelParams& params, const OovProbeSpec& spec) {
  std::vector<OovScore> out;
  SymbolSeq sample;
  if (spec.sample_chars > 0) {
    SampleOptions opts;
    opts.max_sentence = 500;
    const std::size_t streams = 16;
    sample = sample_streams(params, streams, (spec.sample_chars + streams - 1) / streams, spec.seed, opts).ids;
    sample.resize(spec.sample_chars);
  }
  const std::vector<SymbolSeq> contexts = spec.contexts.empty() ? std::vector<SymbolSeq>{SymbolSeq{}}
                                                                 : spec.contexts;
  for (const auto& word : spec.words) {
    const SymbolSeq w = encode_word(word);
    OovScore score;
    score.word = word;
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& ctx : contexts) {
      SymbolSeq s;
      s.push_back(Vocab::kEos);
      s.insert(s.end(), ctx.begin(), ctx.end());
      const std::size_t first = s.size();
      s.insert(s.end(), w.begin(), w.end());
      ScoredSequence scored = score_sequence(params, s, ModelState::zeros(params.spec));
      // log2_probs[t] scores s[t + 1].
      for (std::size_t t = first - 1; t + 1 < s.size(); ++t) {
        total += scored.log2_probs[t];
        ++n;
      }
    }
    score.mean_log2 = n > 0 ? total / static_cast<double>(n) : 0.0;
    score.presence = count_word(sample, word);
    out.push_back(score);
  }
  return out;
}

std::vector<TransferRecord> TransferReport::cycle_records() const {
  std::vector<TransferRecord> out;
  for (const auto& r : records) {
    if (r.end_of_cycle) out.push_back(r);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void evaluate_into(TransferRecord& rec, const ModelParams& p, const EvalSets& eval,
                   const OovProbeSpec* probe) {
  if (eval.full.size() >= 2) rec.bpc_full = bpc(p, eval.full);
  if (eval.private_set.size() >= 2) rec.bpc_private = bpc(p, eval.private_set);
  if (eval.public_set.size() >= 2) rec.bpc_public = bpc(p, eval.public_set);
  if (probe != nullptr) rec.oov = oov_probe(p, *probe);
}

double selection_metric(const TransferRecord& r) {
  if (!std::isnan(r.bpc_full)) return r.bpc_full;
  if (!std::isnan(r.bpc_private)) return r.bpc_private;
  return r.bpc_public;
}

}  // namespace

void TransferReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << kTransferCsvHeader << '\n';
  for (const auto& r : records) {
    double oov_mean = std::numeric_limits<double>::quiet_NaN();
    std::size_t presence = 0;
    if (!r.oov.empty()) {
      oov_mean = 0.0;
      for (const auto& s : r.oov) {
        oov_mean += s.mean_log2;
        presence += s.presence;
      }
      oov_mean /= static_cast<double>(r.oov.size());
    }
    out << r.cycle << ',' << r.frames << ',' << r.chars_generated << ',' << fmt(r.bpc_full) << ','
        << fmt(r.bpc_private) << ',' << fmt(r.bpc_public) << ',' << (r.end_of_cycle ? 1 : 0) << ','
        << fmt(oov_mean) << ',' << (r.oov.empty() ? std::string() : std::to_string(presence))
        << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::uint64_t lot_seed(std::uint64_t base, std::size_t cycle) {
  return Rng(base).split(0x10700000ULL + cycle).next_u64();
}

SampledText generate_lot(const ModelParams& generator, std::size_t chars, std::uint64_t seed,
                         const GktConfig& cfg) {
  SampleOptions opts;
  opts.temperature = cfg.temperature;
  opts.max_sentence = cfg.max_sentence;
  return sample_sequence(generator, chars, seed, opts);
}

TrainConfig lot_train_config(const GktConfig& cfg) {
  TrainConfig t = cfg.train;
  t.max_passes = cfg.passes_per_lot;
  t.keep_best = false;
  return t;
}

TransferResult run_tdgkt(const ModelParams& teacher, ModelParams student, const GktConfig& cfg,
                         const EvalSets& eval, const OovProbeSpec* probe) {
  cfg.validate();
  teacher.check_shapes();
  student.check_shapes();
  if (teacher.spec.vocab_size != student.spec.vocab_size) {
    throw DataError("teacher and student vocabularies differ");
  }
  TransferResult res;
  TransferRecord initial;
  initial.end_of_cycle = true;
  evaluate_into(initial, student, eval, probe);
  res.report.records.push_back(initial);

  SampleOptions opts;
  opts.temperature = cfg.temperature;
  opts.max_sentence = cfg.max_sentence;
  const std::size_t streams = std::min(cfg.generation_streams, cfg.budget_chars);
  const std::size_t per_stream = (cfg.budget_chars + streams - 1) / streams;
  SampledText text = sample_streams(teacher, streams, per_stream, lot_seed(cfg.seed, 1), opts);
  text.ids.resize(cfg.budget_chars);
  text.labels.resize(cfg.budget_chars);
  res.report.forced_eos = text.forced_eos;
  const TrainingStream data = TrainingStream::from_generated(text.ids, std::move(text.labels));

  Trainer trainer(std::move(student), cfg.train);
  auto evaluator = [&](const ModelParams& p, std::uint64_t frames) {
    TransferRecord rec;
    rec.cycle = 1;
    rec.frames = frames;
    rec.chars_generated = cfg.budget_chars;
    evaluate_into(rec, p, eval, probe);
    res.report.records.push_back(rec);
    return selection_metric(rec);
  };
  TrainResult tr = trainer.fit(data, evaluator);
  if (res.report.records.size() > 1) res.report.records.back().end_of_cycle = true;
  res.student = std::move(tr.params);
  res.optimizer = trainer.optimizer();
  res.frames = trainer.frames();
  res.updates = trainer.updates();
  return res;
}

TransferResult run_sdgkt(const ModelParams& teacher, ModelParams student, const GktConfig& cfg,
                         const EvalSets& eval, const OovProbeSpec* probe) {
  cfg.validate();
  teacher.check_shapes();
  student.check_shapes();
  if (teacher.spec.vocab_size != student.spec.vocab_size) {
    throw DataError("teacher and student vocabularies differ");
  }
  TransferResult res;
  TransferRecord initial;
  initial.end_of_cycle = true;
  evaluate_into(initial, student, eval, probe);
  res.report.records.push_back(initial);

  Trainer trainer(std::move(student), lot_train_config(cfg));
  std::uint64_t generated = 0;
  for (std::size_t cycle = 1; cycle <= cfg.cycles; ++cycle) {
    SampledText lot = generate_lot(trainer.params(), cfg.lot_chars, lot_seed(cfg.seed, cycle), cfg);
    res.report.forced_eos += lot.forced_eos;
    generated += lot.ids.size();
    SoftLabelSeq labels = teacher_labels(teacher, lot.ids);
    const TrainingStream data = TrainingStream::from_generated(lot.ids, std::move(labels));
    auto evaluator = [&](const ModelParams& p, std::uint64_t frames) {
      TransferRecord rec;
      rec.cycle = cycle;
      rec.frames = frames;
      rec.chars_generated = generated;
      evaluate_into(rec, p, eval, probe);
      res.report.records.push_back(rec);
      return selection_metric(rec);
    };
    trainer.fit(data, evaluator);
    res.report.records.back().end_of_cycle = true;
  }
  res.student = trainer.params();
  res.optimizer = trainer.optimizer();
  res.frames = trainer.frames();
  res.updates = trainer.updates();
  return res;
}

}  // namespace gkt
