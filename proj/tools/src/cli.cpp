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

#include "gkt_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <map>
#include <ostream>

#include "gkt/errors.hpp"
#include "gkt_cli/commands.hpp"

namespace gkt::cli {
namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

struct CommandSpec {
  const char* name;
  const char* help;
  std::vector<FlagSpec> flags;
};

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = {
      {"prepare",
       "Preprocess raw text into canonical train/valid/test files, private/public partitions and shards",
       {{"--input", "prepare.input", "raw text file"},
        {"--out", "prepare.out_dir", "output directory"},
        {"--fractions", "prepare.fractions", "train,valid,test character fractions"},
        {"--words", "prepare.words", "private word list file (default: months, weekdays, seasons)"},
        {"--shards", "prepare.shards", "number of private-data shards"},
        {"--shard-seed", "prepare.shard_seed", "seed of the sentence shuffle before sharding"}}},
      {"train",
       "Train a model on hard targets or on a soft-label file",
       {{"--corpus", "train.corpus", "canonical corpus file"},
        {"--valid", "train.valid", "validation corpus file"},
        {"--spec", "model.spec", "model shape CELLSxLAYERS, e.g. 256x2 or 512x2"},
        {"--model-seed", "model.seed", "initialization seed"},
        {"--init", "train.init", "checkpoint to resume from"},
        {"--targets", "train.targets", "hard | soft:<label file>"},
        {"--updates", "train.updates", "number of updates"},
        {"--passes", "train.passes", "stop after this many passes (0: no limit)"},
        {"--window", "train.window", "BPTT window"},
        {"--batch", "train.batch", "parallel streams"},
        {"--lr", "train.lr", "learning rate"},
        {"--eval-every", "train.eval_every", "updates between evaluations"},
        {"--seed", "train.seed", "training seed recorded in the lineage"},
        {"--out", "train.out", "output checkpoint"},
        {"--csv", "train.csv", "convergence CSV"}}},
      {"generate",
       "Sample text (and optionally its soft labels) from a checkpoint",
       {{"--checkpoint", "generate.checkpoint", "model checkpoint"},
        {"--chars", "generate.chars", "symbols to generate"},
        {"--seed", "generate.seed", "sampling seed"},
        {"--temperature", "generate.temperature", "softmax temperature"},
        {"--max-sentence", "generate.max_sentence", "force EOS after this many symbols"},
        {"--streams", "generate.streams", "lockstep samplers"},
        {"--out", "generate.out", "generated text file"},
        {"--labels", "generate.labels", "also write the soft-label file here"}}},
      {"gkt",
       "Teacher-driven or student-driven generative knowledge transfer",
       {{"--teacher", "gkt.teacher", "teacher checkpoint"},
        {"--student", "gkt.student", "student checkpoint (required for sd)"},
        {"--spec", "model.spec", "student shape when no checkpoint is given"},
        {"--model-seed", "model.seed", "student initialization seed"},
        {"--mode", "gkt.mode", "td | sd"},
        {"--lot", "gkt.lot", "characters per student-driven cycle"},
        {"--cycles", "gkt.cycles", "student-driven cycles"},
        {"--budget", "gkt.budget", "characters generated by the teacher (td)"},
        {"--temperature", "gkt.temperature", "sampling temperature"},
        {"--seed", "gkt.seed", "generation seed"},
        {"--updates", "gkt.updates", "updates (td) or per-lot update cap (sd)"},
        {"--eval-full", "eval.full", "full evaluation set"},
        {"--eval-private", "eval.private", "private evaluation set"},
        {"--eval-public", "eval.public", "public evaluation set"},
        {"--probe-words", "gkt.probe_words", "comma-separated words to probe, or 'default'"},
        {"--out", "gkt.out", "output student checkpoint"},
        {"--report", "gkt.report", "transfer report CSV"}}},
      {"federate",
       "Run the server / devices / aggregator federation",
       {{"--data-dir", "federation.data_dir", "directory written by prepare"},
        {"--devices", "federation.devices", "number of devices"},
        {"--init", "federation.init", "full | transfer | private"},
        {"--rounds", "federation.rounds", "maximum rounds"},
        {"--patience", "federation.patience", "rounds without improvement before stopping"},
        {"--mode", "federation.mode", "td | sd"},
        {"--lot", "federation.lot", "characters per round"},
        {"--server", "federation.server", "initial server checkpoint (skips bootstrap training)"},
        {"--spec", "model.spec", "model shape for bootstrap training"},
        {"--seed", "federation.seed", "protocol seed"},
        {"--quantize", "federation.quantize", "send labels as 32-bit reals (true|false)"},
        {"--mirror", "federation.mirror", "JSON-lines mirror of every delivered message"},
        {"--out", "federation.out", "output server checkpoint"}}},
      {"eval",
       "Bits per character of a checkpoint on full / private / public sets",
       {{"--checkpoint", "eval.checkpoint", "model checkpoint"},
        {"--full", "eval.full", "full evaluation set"},
        {"--private", "eval.private", "private evaluation set"},
        {"--public", "eval.public", "public evaluation set"},
        {"--out", "eval.out", "CSV output"}}},
  };
  return specs;
}

}  // namespace

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const DataError&) {
    return kExitData;
  } catch (const NumericalError&) {
    return kExitNumerical;
  } catch (...) {
    return kExitFailure;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative knowledge transfer for character-level LSTM language models", "gkt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  struct Bound {
    CLI::App* sub;
    const CommandSpec* spec;
    std::string config;
    std::vector<std::string> assignments;
    std::string manifest;
    std::map<std::string, std::string> flags;
  };
  std::vector<Bound> bound;
  bound.reserve(command_specs().size());
  for (const auto& spec : command_specs()) {
    Bound& b = bound.emplace_back();
    b.spec = &spec;
    b.sub = app.add_subcommand(spec.name, spec.help);
    b.sub->add_option("--config", b.config, "INI config file ([section] key = value)");
    b.sub->add_option("--set", b.assignments, "override: section.key=value (repeatable)");
    b.sub->add_option("--manifest", b.manifest, "run manifest path");
    for (const auto& f : spec.flags) b.sub->add_option(f.flag, b.flags[f.key], f.help);
  }
  std::string replay_manifest;
  std::string replay_dir;
  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare artifact hashes");
  replay_cmd->add_option("manifest", replay_manifest, "manifest written by an earlier run")->required();
  replay_cmd->add_option("--out-dir", replay_dir, "write outputs here instead of the recorded paths");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (replay_cmd->parsed()) {
      const ReplayReport r = replay(replay_manifest, replay_dir, out, err);
      for (const auto& n : r.matched) out << "match     " << n << "\n";
      for (const auto& n : r.mismatched) out << "MISMATCH  " << n << "\n";
      for (const auto& n : r.missing) out << "MISSING   " << n << "\n";
      out << (r.ok() ? "replay reproduced all " : "replay differs: ") << r.matched.size() << "/"
          << r.matched.size() + r.mismatched.size() + r.missing.size() << " artifacts\n";
      return r.ok() ? kExitOk : kExitFailure;
    }
    for (auto& b : bound) {
      if (!b.sub->parsed()) continue;
      Settings settings;
      if (!b.config.empty()) settings.load_ini(b.config);
      for (const auto& a : b.assignments) settings.assign(a);
      for (const auto& f : b.spec->flags) {
        if (b.sub->count(f.flag) > 0) settings.set(f.key, b.flags[f.key]);
      }
      if (!b.manifest.empty()) settings.set("run.manifest", b.manifest);
      std::vector<std::string> argv = {"gkt"};
      argv.insert(argv.end(), args.begin(), args.end());
      const RunOutcome r = execute(b.spec->name, std::move(settings), argv, out, err);
      out << "manifest: " << r.manifest_path << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "gkt: error: " << e.what() << "\n";
    return exit_code_for(std::current_exception());
  }
  return kExitFailure;
}

}  // namespace gkt::cli
