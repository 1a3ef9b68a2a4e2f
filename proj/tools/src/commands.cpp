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

#include "gkt_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "gkt/checkpoint.hpp"
#include "gkt/corpus.hpp"
#include "gkt/errors.hpp"
#include "gkt/federation.hpp"
#include "gkt/transfer.hpp"
#include "gkt/wire.hpp"

namespace gkt::cli {
namespace fs = std::filesystem;

std::string RunContext::input(const std::string& key) {
  const std::string path = settings.require(key);
  if (!fs::is_regular_file(path)) throw DataError(key + ": no such file " + path);
  inputs_[key] = path;
  return path;
}

std::string RunContext::optional_input(const std::string& key) {
  const std::string path = settings.text(key, "");
  if (path.empty()) return path;
  if (!fs::is_regular_file(path)) throw DataError(key + ": no such file " + path);
  inputs_[key] = path;
  return path;
}

void RunContext::record_input(const std::string& name, const std::string& path) {
  if (!fs::is_regular_file(path)) throw DataError(name + ": no such file " + path);
  inputs_[name] = path;
}

std::string RunContext::output(const std::string& key, const std::string& fallback) {
  const std::string path = fallback.empty() ? settings.require(key) : settings.text(key, fallback);
  if (path.empty()) throw ConfigError("missing required setting " + key);
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  outputs_[key] = path;
  output_keys_[key] = path;
  if (default_manifest_ == "gkt_run.manifest.json") default_manifest_ = path + ".manifest.json";
  return path;
}

std::string RunContext::optional_output(const std::string& key) {
  const std::string path = settings.text(key, "");
  if (path.empty()) return path;
  return output(key, path);
}

std::string RunContext::output_dir(const std::string& key, const std::string& fallback) {
  const std::string dir = fallback.empty() ? settings.require(key) : settings.text(key, fallback);
  fs::create_directories(dir);
  dirs_[key] = dir;
  output_keys_[key] = dir;
  return dir;
}

std::string RunContext::produced(const std::string& dir_key, const std::string& relative) {
  const fs::path path = fs::path(dirs_.at(dir_key)) / relative;
  fs::create_directories(path.parent_path());
  outputs_[dir_key + "/" + relative] = path.string();
  return path.string();
}

RunManifest RunContext::finish(const std::string& command, const std::vector<std::string>& argv) const {
  RunManifest m;
  m.command = command;
  m.argv = argv;
  m.config = settings.resolved();
  for (const auto& [key, value] : m.config) {
    const auto dot = key.rfind('.');
    const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
    if (leaf.size() >= 4 && leaf.compare(leaf.size() - 4, 4, "seed") == 0 && !value.empty()) {
      m.seeds[key] = std::stoull(value);
    }
  }
  for (const auto& [k, p] : inputs_) m.inputs[k] = {p, artifact_hash(p)};
  for (const auto& [k, p] : outputs_) m.outputs[k] = {p, artifact_hash(p)};
  m.output_keys = output_keys_;
  m.results = results_;
  return m;
}

namespace {

std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_real(const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + raw + "' is not a number");
  }
}

TrainConfig read_train_config(const Settings& s, const std::string& section) {
  auto key = [&](const std::string& k) {
    return section != "train" && s.has(section + "." + k) ? section + "." + k : "train." + k;
  };
  TrainConfig c;
  c.bptt_window = s.count(key("window"), c.bptt_window);
  c.batch_streams = s.count(key("batch"), c.batch_streams);
  c.lr = s.real(key("lr"), c.lr);
  c.adadelta_rho = s.real(key("rho"), c.adadelta_rho);
  c.adadelta_eps = s.real(key("eps"), c.adadelta_eps);
  c.momentum = s.real(key("momentum"), c.momentum);
  const std::string order = s.text(key("order"), "adadelta_nesterov");
  if (order == "adadelta_nesterov") {
    c.order = MomentumOrder::kAdadeltaThenNesterov;
  } else if (order == "nesterov_adadelta") {
    c.order = MomentumOrder::kNesterovThenAdadelta;
  } else {
    throw ConfigError(key("order") + " must be adadelta_nesterov or nesterov_adadelta, got " + order);
  }
  c.max_updates = s.count(key("updates"), c.max_updates);
  c.max_passes = s.count(key("passes"), c.max_passes);
  c.eval_every = s.count(key("eval_every"), c.eval_every);
  c.seed = s.u64(key("seed"), c.seed);
  c.clip_norm = s.real(key("clip"), c.clip_norm);
  c.keep_best = s.flag(key("keep_best"), c.keep_best);
  c.validate();
  return c;
}

ModelSpec read_spec(const Settings& s) { return ModelSpec::parse(s.text("model.spec", "256x2")); }

Checkpoint fresh_checkpoint(const Settings& s) {
  Checkpoint c;
  const std::uint64_t seed = s.u64("model.seed", 1);
  c.params = ModelParams::init(read_spec(s), seed);
  c.seed_lineage.push_back(seed);
  return c;
}

EvalSets read_eval_sets(RunContext& ctx, const std::string& section) {
  EvalSets e;
  if (auto p = ctx.optional_input(section + ".full"); !p.empty()) e.full = read_corpus_file(p);
  if (auto p = ctx.optional_input(section + ".private"); !p.empty()) e.private_set = read_corpus_file(p);
  if (auto p = ctx.optional_input(section + ".public"); !p.empty()) e.public_set = read_corpus_file(p);
  return e;
}

double bpc_or_nan(const ModelParams& p, const SymbolSeq& s) {
  return s.size() >= 2 ? bpc(p, s) : std::numeric_limits<double>::quiet_NaN();
}

void cmd_prepare(RunContext& ctx) {
  const Settings& s = ctx.settings;
  const std::string input = ctx.input("prepare.input");
  const std::string dir = ctx.output_dir("prepare.out_dir");
  ctx.set_default_manifest((fs::path(dir) / "manifest.json").string());

  const auto frac = split(s.text("prepare.fractions", "0.98,0.01,0.01"), ',');
  if (frac.size() != 3) throw ConfigError("prepare.fractions needs three comma-separated values");
  Fractions f{parse_real("prepare.fractions", frac[0]), parse_real("prepare.fractions", frac[1]),
              parse_real("prepare.fractions", frac[2])};
  const std::size_t n_shards = s.count("prepare.shards", 10);
  const std::uint64_t shard_seed = s.u64("prepare.shard_seed", 1);
  const std::string words_path = ctx.optional_input("prepare.words");
  const std::set<std::string> words = words_path.empty() ? default_private_words() : read_word_list(words_path);

  SymbolSeq corpus;
  try {
    corpus = preprocess(read_text_file(input));
  } catch (const DataError& e) {
    throw DataError(input + ": " + e.what());
  }

  std::string list = "# Whole words that mark a sentence as private, one per line.\n";
  for (const auto& w : words) list += w + "\n";
  write_text_file(ctx.produced("prepare.out_dir", "private_words.txt"), list);

  const CorpusSplit parts = split_corpus(corpus, f);
  KeyValues meta = {{"format", "gkt-prepare/1"},
                    {"input", input},
                    {"input_fnv1a64", artifact_hash(input)},
                    {"fractions", fmt_real(f.train) + "," + fmt_real(f.valid) + "," + fmt_real(f.test)},
                    {"chars", std::to_string(corpus.size())},
                    {"sentences", std::to_string(count_sentences(corpus))},
                    {"shards", std::to_string(n_shards)},
                    {"shard_seed", std::to_string(shard_seed)}};
  SymbolSeq train_private;
  for (const auto& [name, part] : {std::pair{"train", &parts.train}, std::pair{"valid", &parts.valid},
                                   std::pair{"test", &parts.test}}) {
    const PrivatePartition p = partition_private(*part, words);
    const std::string n(name);
    write_corpus_file(ctx.produced("prepare.out_dir", n + "_full.txt"), *part);
    write_corpus_file(ctx.produced("prepare.out_dir", n + "_private.txt"), p.private_sentences);
    write_corpus_file(ctx.produced("prepare.out_dir", n + "_public.txt"), p.public_sentences);
    meta.emplace_back(n + "_chars", std::to_string(part->size()));
    meta.emplace_back(n + "_private_chars", std::to_string(p.private_sentences.size()));
    meta.emplace_back(n + "_public_chars", std::to_string(p.public_sentences.size()));
    if (n == "train") train_private = p.private_sentences;
  }
  if (n_shards > 0) {
    const auto shards = shard(train_private, n_shards, shard_seed);
    for (std::size_t i = 0; i < shards.size(); ++i) {
      std::ostringstream name;
      name << "shards/shard_" << std::setw(3) << std::setfill('0') << i << ".txt";
      write_corpus_file(ctx.produced("prepare.out_dir", name.str()), shards[i]);
    }
  }
  write_metadata(ctx.produced("prepare.out_dir", "metadata.txt"), meta);
  ctx.out << "prepared " << corpus.size() << " symbols: train " << parts.train.size() << ", valid "
          << parts.valid.size() << ", test " << parts.test.size() << " -> " << dir << "\n";
}

void cmd_train(RunContext& ctx) {
  const Settings& s = ctx.settings;
  const SymbolSeq text = read_corpus_file(ctx.input("train.corpus"));
  const std::string targets = s.text("train.targets", "hard");
  TrainingStream data;
  if (targets == "hard") {
    data = TrainingStream::hard(text);
  } else if (targets.rfind("soft:", 0) == 0) {
    const std::string path = targets.substr(5);
    ctx.record_input("train.targets", path);
    SoftLabelSeq labels = read_label_file(path);
    if (labels.size() != text.size()) {
      throw DimensionError(path + " has " + std::to_string(labels.size()) + " labels for " +
                           std::to_string(text.size()) + " symbols of text");
    }
    data = TrainingStream::from_generated(text, std::move(labels));
  } else {
    throw ConfigError("train.targets must be 'hard' or 'soft:<label file>', got " + targets);
  }

  const std::string init = ctx.optional_input("train.init");
  Checkpoint ckpt = init.empty() ? fresh_checkpoint(s) : load_checkpoint(init);
  const TrainConfig cfg = read_train_config(s, "train");
  SymbolSeq valid;
  if (auto p = ctx.optional_input("train.valid"); !p.empty()) valid = read_corpus_file(p);
  const std::string out = ctx.output("train.out");
  const std::string csv = ctx.output("train.csv", out + ".csv");

  Trainer trainer(ckpt.params, cfg, ckpt.optimizer.value_or(OptimizerState{}));
  trainer.set_counters(ckpt.updates, ckpt.frames_trained);
  Evaluator eval;
  if (valid.size() >= 2) eval = [&](const ModelParams& p, std::uint64_t) { return bpc(p, valid); };
  TrainResult r = trainer.fit(data, eval);
  if (cfg.max_updates > 0) {
    ckpt.params = std::move(r.params);
    ckpt.optimizer = trainer.optimizer();
    ckpt.frames_trained = trainer.frames();
    ckpt.updates = trainer.updates();
    ckpt.seed_lineage.push_back(cfg.seed);
  }
  save_checkpoint(out, ckpt);
  write_convergence_csv(csv, r.log);

  ctx.result("updates", std::to_string(ckpt.updates));
  ctx.result("frames", std::to_string(ckpt.frames_trained));
  ctx.result("clip_events", std::to_string(r.clip_events));
  ctx.out << ckpt.params.spec.to_string() << ": " << ckpt.updates << " updates, " << ckpt.frames_trained
          << " frames";
  if (valid.size() >= 2) {
    const double v = bpc(ckpt.params, valid);
    ctx.result("valid_bpc", fmt_real(v));
    ctx.out << ", valid BPC " << std::fixed << std::setprecision(4) << v << std::defaultfloat;
  }
  ctx.out << " -> " << out << "\n";
}

void cmd_generate(RunContext& ctx) {
  const Settings& s = ctx.settings;
  const Checkpoint ckpt = load_checkpoint(ctx.input("generate.checkpoint"));
  const std::size_t chars = s.count("generate.chars", 100000);
  if (chars == 0) throw ConfigError("generate.chars must be positive");
  const std::uint64_t seed = s.u64("generate.seed", 1);
  SampleOptions opts;
  opts.temperature = s.real("generate.temperature", 1.0);
  opts.max_sentence = s.count("generate.max_sentence", 500);
  const std::size_t streams = s.count("generate.streams", 1);
  const std::string out = ctx.output("generate.out");
  const std::string labels_path = ctx.optional_output("generate.labels");

  SampledText t = streams <= 1 ? sample_sequence(ckpt.params, chars, seed, opts)
                               : sample_streams(ckpt.params, streams, (chars + streams - 1) / streams, seed, opts);
  t.ids.resize(chars);
  t.labels.resize(chars);
  write_corpus_file(out, t.ids);
  if (!labels_path.empty()) {
    // Labels are the untempered teacher distributions.
    const SoftLabelSeq labels = opts.temperature == 1.0 ? t.labels : teacher_labels(ckpt.params, t.ids);
    write_label_file(labels_path, labels);
  }
  ctx.result("forced_eos", std::to_string(t.forced_eos));
  ctx.out << "generated " << chars << " symbols (" << t.forced_eos << " forced EOS) -> " << out << "\n";
}

std::set<std::string> probe_words(const Settings& s) {
  const std::string raw = s.text("gkt.probe_words", "");
  if (raw.empty()) return {};
  if (raw == "default") return default_private_words();
  std::set<std::string> words;
  for (const auto& w : split(raw, ',')) {
    if (!w.empty()) words.insert(w);
  }
  return words;
}

void cmd_gkt(RunContext& ctx) {
  const Settings& s = ctx.settings;
  const Checkpoint teacher = load_checkpoint(ctx.input("gkt.teacher"));
  GktConfig g;
  g.mode = parse_transfer_mode(s.text("gkt.mode", "sd"));
  g.budget_chars = s.count("gkt.budget", g.budget_chars);
  // Teacher-driven runs are one generation pass: the lot defaults to the budget.
  g.lot_chars = s.count("gkt.lot", g.mode == TransferMode::kTeacherDriven ? g.budget_chars : g.lot_chars);
  g.cycles = s.count("gkt.cycles", g.cycles);
  g.temperature = s.real("gkt.temperature", g.temperature);
  g.passes_per_lot = s.count("gkt.passes_per_lot", g.passes_per_lot);
  g.max_sentence = s.count("gkt.max_sentence", g.max_sentence);
  g.generation_streams = s.count("gkt.streams", g.generation_streams);
  g.seed = s.u64("gkt.seed", g.seed);
  g.train = read_train_config(s, "gkt");
  g.validate();

  const std::string student_path = ctx.optional_input("gkt.student");
  Checkpoint student = student_path.empty() ? fresh_checkpoint(s) : load_checkpoint(student_path);
  if (g.mode == TransferMode::kStudentDriven && student.frames_trained == 0) {
    throw ConfigError("student-driven transfer needs a pretrained student checkpoint (gkt.student with frames_trained > 0)");
  }
  const EvalSets eval = read_eval_sets(ctx, "eval");
  const std::set<std::string> words = probe_words(s);
  OovProbeSpec probe;
  probe.words.assign(words.begin(), words.end());
  for (const auto& c : split(s.text("gkt.probe_contexts", "IN |ON |SINCE "), '|')) {
    probe.contexts.push_back(encode_canonical(c));
  }
  probe.sample_chars = s.count("gkt.probe_sample", probe.sample_chars);
  probe.seed = s.u64("gkt.probe_seed", probe.seed);
  const std::string out = ctx.output("gkt.out");
  const std::string report = ctx.output("gkt.report", out + ".report.csv");

  const OovProbeSpec* p = probe.words.empty() ? nullptr : &probe;
  TransferResult r = g.mode == TransferMode::kTeacherDriven ? run_tdgkt(teacher.params, student.params, g, eval, p)
                                                            : run_sdgkt(teacher.params, student.params, g, eval, p);
  student.params = std::move(r.student);
  student.optimizer = std::move(r.optimizer);
  student.frames_trained += r.frames;
  student.updates += r.updates;
  student.seed_lineage.push_back(g.seed);
  save_checkpoint(out, student);
  r.report.write_csv(report);

  const TransferRecord& last = r.report.records.back();
  ctx.result("frames", std::to_string(student.frames_trained));
  ctx.result("bpc_full", fmt_real(last.bpc_full));
  ctx.result("bpc_private", fmt_real(last.bpc_private));
  ctx.result("bpc_public", fmt_real(last.bpc_public));
  ctx.out << to_string(g.mode) << " transfer: " << r.updates << " updates, " << r.frames << " frames";
  if (!std::isnan(last.bpc_full)) ctx.out << ", full BPC " << std::fixed << std::setprecision(4) << last.bpc_full;
  ctx.out << std::defaultfloat << " -> " << out << "\n";
}

std::set<std::pair<std::size_t, std::uint32_t>> parse_dropouts(const std::string& raw) {
  std::set<std::pair<std::size_t, std::uint32_t>> out;
  if (raw.empty()) return out;
  for (const auto& item : split(raw, ',')) {
    const auto rd = split(item, ':');
    if (rd.size() != 2) throw ConfigError("federation.dropouts entries look like round:device, got " + item);
    try {
      out.emplace(std::stoull(rd[0]), static_cast<std::uint32_t>(std::stoul(rd[1])));
    } catch (const std::exception&) {
      throw ConfigError("federation.dropouts entry is not numeric: " + item);
    }
  }
  return out;
}

void cmd_federate(RunContext& ctx) {
  const Settings& s = ctx.settings;
  const fs::path dir = s.require("federation.data_dir");
  const std::string split_name = s.text("federation.eval_split", "valid");
  if (split_name != "valid" && split_name != "test") {
    throw ConfigError("federation.eval_split must be valid or test, got " + split_name);
  }
  auto data_file = [&](const std::string& name) {
    const std::string path = (dir / name).string();
    ctx.record_input("federation.data_dir/" + name, path);
    return read_corpus_file(path);
  };
  const SymbolSeq public_train = data_file("train_public.txt");
  const SymbolSeq private_train = data_file("train_private.txt");
  EvalSets eval;
  eval.full = data_file(split_name + "_full.txt");
  eval.private_set = data_file(split_name + "_private.txt");
  eval.public_set = data_file(split_name + "_public.txt");

  FederationConfig fc;
  fc.n_devices = s.count("federation.devices", fc.n_devices);
  fc.device_init = parse_device_init(s.text("federation.init", "transfer"));
  fc.rounds = s.count("federation.rounds", fc.rounds);
  fc.patience = s.count("federation.patience", fc.patience);
  fc.quantize_labels = s.flag("federation.quantize", fc.quantize_labels);
  fc.concurrent_devices = s.flag("federation.concurrent", fc.concurrent_devices);
  fc.dropouts = parse_dropouts(s.text("federation.dropouts", ""));
  fc.transfer.mode = parse_transfer_mode(s.text("federation.mode", "sd"));
  fc.transfer.lot_chars = s.count("federation.lot", 50000);
  fc.transfer.temperature = s.real("federation.temperature", fc.transfer.temperature);
  fc.transfer.max_sentence = s.count("federation.max_sentence", fc.transfer.max_sentence);
  fc.transfer.passes_per_lot = s.count("federation.passes_per_lot", fc.transfer.passes_per_lot);
  fc.transfer.seed = s.u64("federation.seed", 1);
  fc.transfer.train = read_train_config(s, "server");
  fc.validate();
  const std::uint64_t shard_seed = s.u64("federation.shard_seed", 1);
  const std::uint64_t device_seed = s.u64("federation.device_seed", 2);
  const TrainConfig device_cfg = read_train_config(s, "device");

  const std::string server_path = ctx.optional_input("federation.server");
  Bootstrap boot;
  std::vector<std::uint64_t> lineage;
  if (server_path.empty()) {
    const std::uint64_t model_seed = s.u64("model.seed", 1);
    const TrainConfig boot_cfg = read_train_config(s, "bootstrap");
    boot = bootstrap(public_train, read_spec(s), boot_cfg,
                     model_seed, [&](const ModelParams& p, std::uint64_t) { return bpc(p, eval.public_set); });
    lineage = {model_seed, boot_cfg.seed};
  } else {
    const Checkpoint c = load_checkpoint(server_path);
    boot.server = c.params;
    boot.device_template = c.params;
    lineage = c.seed_lineage;
  }

  const std::string out = ctx.output("federation.out");
  const std::string rounds_csv = ctx.output("federation.rounds_csv", out + ".rounds.csv");
  const std::string ensemble_csv = ctx.output("federation.ensemble_csv", out + ".ensemble.csv");
  const std::string audit_json = ctx.output("federation.audit", out + ".audit.json");
  const std::string mirror_path = ctx.optional_output("federation.mirror");

  const auto shards = shard(private_train, fc.n_devices, shard_seed);
  std::vector<DeviceReport> reports;
  std::vector<Device> devices =
      fine_tune_devices(initial_devices(boot, fc.device_init, fc.n_devices, device_seed), shards, device_cfg,
                        fc.device_init, &public_train, eval.private_set, &reports, &ctx.err);
  std::vector<const ModelParams*> members;
  for (const auto& d : devices) {
    if (d.active) members.push_back(&d.model);
  }
  const EnsembleScores ens = ensemble_eval(members, eval.private_set);
  write_ensemble_csv(ensemble_csv, fc.n_devices, fc.device_init, ens);

  Federation fed(boot.server, std::move(devices), fc);
  std::ofstream mirror;
  if (!mirror_path.empty()) {
    mirror.open(mirror_path);
    if (!mirror) throw DataError("cannot write " + mirror_path);
    fed.network().set_mirror(&mirror);
  }
  const FederationResult r = fed.run(eval);
  write_rounds_csv(rounds_csv, r.rounds, fc.transfer.mode);

  Checkpoint server;
  server.params = r.server;
  server.frames_trained = r.rounds.back().server_frames;
  server.seed_lineage = lineage;
  server.seed_lineage.push_back(fc.transfer.seed);
  save_checkpoint(out, server);

  nlohmann::json audit;
  const auto counts = [](const DeliveryCounts& c) {
    return nlohmann::json{{"text_lots", c.text_lots}, {"soft_label_lots", c.soft_label_lots}, {"aggregated", c.aggregated}};
  };
  audit["transcript_fnv1a64"] = to_hex(r.transcript_hash);
  audit["routing"] = {{"to_server", counts(r.routing.to_server)},
                      {"to_devices", counts(r.routing.to_devices)},
                      {"to_aggregator", counts(r.routing.to_aggregator)},
                      {"rejected", r.routing.rejected},
                      {"messages", r.routing.messages},
                      {"bytes", r.routing.bytes},
                      {"violations", r.routing.violations()}};
  audit["distributions"] = {{"positions", r.distributions.positions},
                            {"invalid", r.distributions.invalid},
                            {"max_sum_error", r.distributions.max_sum_error},
                            {"min_entry", r.distributions.min_entry}};
  nlohmann::json devs = nlohmann::json::array();
  for (const auto& d : reports) {
    devs.push_back({{"device", d.device}, {"excluded", d.excluded}, {"bpc_init", d.bpc_init}, {"bpc_tuned", d.bpc_tuned}});
  }
  audit["devices"] = devs;
  std::ofstream(audit_json) << audit.dump(2) << '\n';

  ctx.result("transcript_hash", to_hex(r.transcript_hash));
  ctx.result("routing_violations", std::to_string(r.routing.violations()));
  ctx.result("average_bpc", fmt_real(ens.average));
  ctx.result("ensemble_bpc", fmt_real(ens.ensemble));
  const RoundReport& last = r.rounds.back();
  ctx.out << "federation (" << to_string(fc.transfer.mode) << ", " << fc.n_devices << " devices, "
          << to_string(fc.device_init) << "): " << r.rounds.size() - 1 << " rounds, private BPC "
          << std::fixed << std::setprecision(4) << r.rounds.front().bpc_private << " -> " << last.bpc_private
          << ", public BPC " << r.rounds.front().bpc_public << " -> " << last.bpc_public << std::defaultfloat
          << ", violations " << r.routing.violations() << ", transcript " << to_hex(r.transcript_hash) << "\n";
}

void cmd_eval(RunContext& ctx) {
  const std::string path = ctx.input("eval.checkpoint");
  const Checkpoint ckpt = load_checkpoint(path);
  const EvalSets e = read_eval_sets(ctx, "eval");
  if (e.full.empty() && e.private_set.empty() && e.public_set.empty()) {
    throw ConfigError("eval needs at least one of eval.full, eval.private, eval.public");
  }
  const std::string out = ctx.output("eval.out", path + ".eval.csv");
  const double full = bpc_or_nan(ckpt.params, e.full);
  const double priv = bpc_or_nan(ckpt.params, e.private_set);
  const double pub = bpc_or_nan(ckpt.params, e.public_set);
  std::ofstream csv(out);
  if (!csv) throw DataError("cannot write " + out);
  csv << "bpc_full,bpc_private,bpc_public\n" << fmt_real(full) << ',' << fmt_real(priv) << ',' << fmt_real(pub) << '\n';
  csv.close();
  ctx.result("bpc_full", fmt_real(full));
  ctx.result("bpc_private", fmt_real(priv));
  ctx.result("bpc_public", fmt_real(pub));
  ctx.out << std::fixed << std::setprecision(4) << "set      BPC\nfull     " << full << "\nprivate  " << priv
          << "\npublic   " << pub << std::defaultfloat << "\n";
}

}  // namespace

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table = {
      {"prepare", cmd_prepare}, {"train", cmd_train},       {"generate", cmd_generate},
      {"gkt", cmd_gkt},         {"federate", cmd_federate}, {"eval", cmd_eval},
  };
  return table;
}

RunOutcome execute(const std::string& command, Settings settings, const std::vector<std::string>& argv,
                   std::ostream& out, std::ostream& err) {
  const auto it = commands().find(command);
  if (it == commands().end()) throw ConfigError("unknown command " + command);
  RunContext ctx(settings, out, err);
  it->second(ctx);
  RunOutcome r;
  r.manifest_path = settings.text("run.manifest", ctx.default_manifest());
  ctx.register_output_key("run.manifest", r.manifest_path);
  for (const auto& key : settings.unused()) err << "warning: setting " << key << " is not used by " << command << "\n";
  r.manifest = ctx.finish(command, argv);
  r.manifest.save(r.manifest_path);
  return r;
}

ReplayReport replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                    std::ostream& err) {
  const RunManifest old = RunManifest::load(manifest_path);
  for (const auto& [key, a] : old.inputs) {
    if (!fs::is_regular_file(a.path) || artifact_hash(a.path) != a.hash) {
      throw DataError("input " + key + " (" + a.path + ") differs from the one recorded in " + manifest_path);
    }
  }
  Settings s(old.config);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (const auto& [key, path] : old.output_keys) {
      s.set(key, (fs::path(out_dir) / fs::path(path).filename()).string());
    }
  }
  const RunOutcome now = execute(old.command, s, old.argv, out, err);
  ReplayReport rep;
  rep.manifest_path = now.manifest_path;
  for (const auto& [name, a] : old.outputs) {
    auto it = now.manifest.outputs.find(name);
    if (it == now.manifest.outputs.end()) {
      rep.missing.push_back(name);
    } else if (it->second.hash == a.hash) {
      rep.matched.push_back(name);
    } else {
      rep.mismatched.push_back(name);
    }
  }
  return rep;
}

}  // namespace gkt::cli
