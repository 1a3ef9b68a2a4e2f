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

#include "gkt/federation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "gkt/errors.hpp"
#include "gkt/hash.hpp"
#include "gkt/rng.hpp"

namespace gkt {

std::uint32_t Role::wire_id() const {
  switch (kind) {
    case Kind::kServer:
      return kServerId;
    case Kind::kAggregator:
      return kAggregatorId;
    case Kind::kDevice:
      return device;
  }
  return kServerId;
}

std::string Role::to_string() const {
  switch (kind) {
    case Kind::kServer:
      return "server";
    case Kind::kAggregator:
      return "aggregator";
    case Kind::kDevice:
      return "device(" + std::to_string(device) + ")";
  }
  return "unknown";
}

DeviceInit parse_device_init(const std::string& s) {
  if (s == "full" || s == "T_full") return DeviceInit::kFull;
  if (s == "transfer" || s == "T_transfer") return DeviceInit::kTransfer;
  if (s == "private" || s == "T_private") return DeviceInit::kPrivate;
  throw ConfigError("unknown device_init '" + s + "' (expected full, transfer, or private)");
}

std::string to_string(DeviceInit d) {
  switch (d) {
    case DeviceInit::kFull:
      return "full";
    case DeviceInit::kTransfer:
      return "transfer";
    case DeviceInit::kPrivate:
      return "private";
  }
  return "unknown";
}

void FederationConfig::validate() const {
  if (n_devices < 1) throw ConfigError("n_devices must be at least 1");
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (n_devices >= kAggregatorId) throw ConfigError("n_devices too large");
  transfer.validate();
  for (const auto& [round, device] : dropouts) {
    if (device >= n_devices) {
      throw ConfigError("dropout names device " + std::to_string(device) + " outside [0, n)");
    }
  }
}

void DistributionAudit::check(const Distribution& d, double tol) {
  ++positions;
  double sum = 0.0;
  bool ok = true;
  for (double x : d.p) {
    if (!std::isfinite(x) || x < 0.0) ok = false;
    min_entry = std::min(min_entry, x);
    sum += x;
  }
  const double err = std::abs(sum - 1.0);
  max_sum_error = std::max(max_sum_error, std::isfinite(err) ? err : std::numeric_limits<double>::infinity());
  if (!ok || !(err <= tol)) ++invalid;
}

void DistributionAudit::merge(const DistributionAudit& o) {
  positions += o.positions;
  invalid += o.invalid;
  max_sum_error = std::max(max_sum_error, o.max_sum_error);
  min_entry = std::min(min_entry, o.min_entry);
}

SimNetwork::SimNetwork(std::size_t n_devices, bool quantize_labels)
    : n_devices_(n_devices), quantize_(quantize_labels), boxes_(n_devices + 2) {}

bool SimNetwork::permitted(MessageType type, const Role& from, const Role& to) {
  using K = Role::Kind;
  switch (type) {
    case MessageType::kTextLot:
      return (from.kind == K::kServer || from.kind == K::kDevice) && to.kind != K::kAggregator &&
             !(from == to);
    case MessageType::kSoftLabelLot:
      return from.kind == K::kDevice && to.kind == K::kAggregator;
    case MessageType::kAggregatedLabels:
      return from.kind == K::kAggregator && to.kind == K::kServer;
  }
  return false;
}

std::size_t SimNetwork::mailbox(const Role& r) const {
  switch (r.kind) {
    case Role::Kind::kServer:
      return n_devices_;
    case Role::Kind::kAggregator:
      return n_devices_ + 1;
    case Role::Kind::kDevice:
      if (r.device >= n_devices_) {
        throw RoutingViolation("no such device " + std::to_string(r.device));
      }
      return r.device;
  }
  throw RoutingViolation("unknown role");
}

void SimNetwork::send(const Role& from, const Role& to, const Message& m) {
  const MessageType type = type_of(m);
  if (!permitted(type, from, to) || sender_of(m) != from.wire_id()) {
    ++audit_.rejected;
    throw RoutingViolation(to_string(type) + " from " + from.to_string() + " to " + to.to_string() +
                           " is not permitted");
  }
  const std::size_t box = mailbox(to);
  const auto frame = encode_frame(m);

  hasher_.update(from.to_string());
  hasher_.update(to.to_string());
  hasher_.update(frame);

  DeliveryCounts& counts = to.kind == Role::Kind::kServer     ? audit_.to_server
                           : to.kind == Role::Kind::kDevice ? audit_.to_devices
                                                            : audit_.to_aggregator;
  switch (type) {
    case MessageType::kTextLot:
      ++counts.text_lots;
      break;
    case MessageType::kSoftLabelLot:
      ++counts.soft_label_lots;
      break;
    case MessageType::kAggregatedLabels:
      ++counts.aggregated;
      break;
  }
  ++audit_.messages;
  audit_.bytes += frame.size();
  if (mirror_ != nullptr) *mirror_ << to_json_line(m) << '\n';

  if (quantize_ && type != MessageType::kTextLot) {
    boxes_[box].push_back(decode_frame(frame));
  } else {
    boxes_[box].push_back(m);
  }
}

std::vector<Message> SimNetwork::drain(const Role& who) {
  std::vector<Message> out;
  out.swap(boxes_[mailbox(who)]);
  return out;
}

std::size_t SimNetwork::pending(const Role& who) const { return boxes_[mailbox(who)].size(); }

std::string SimNetwork::transcript_hex() const { return hasher_.hex(); }

Bootstrap bootstrap(const SymbolSeq& public_corpus, const ModelSpec& spec, const TrainConfig& cfg,
                    std::uint64_t seed, const Evaluator& eval) {
  if (public_corpus.size() < 2) throw DataError("bootstrap needs a nonempty public corpus");
  Bootstrap b;
  b.log = train(ModelParams::init(spec, seed), TrainingStream::hard(public_corpus), cfg, eval);
  b.server = b.log.params;
  b.device_template = b.log.params;
  return b;
}

std::vector<ModelParams> initial_devices(const Bootstrap& boot, DeviceInit init, std::size_t n,
                                         std::uint64_t seed) {
  std::vector<ModelParams> out;
  out.reserve(n);
  Rng root(seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (init == DeviceInit::kTransfer) {
      out.push_back(boot.device_template);
    } else {
      out.push_back(ModelParams::init(boot.device_template.spec, root.split(i + 1).next_u64()));
    }
  }
  return out;
}

std::vector<Device> fine_tune_devices(std::vector<ModelParams> inits,
                                      const std::vector<SymbolSeq>& shards, const TrainConfig& cfg,
                                      DeviceInit init, const SymbolSeq* public_corpus,
                                      const SymbolSeq& eval, std::vector<DeviceReport>* report,
                                      std::ostream* warnings) {
  if (inits.size() != shards.size()) {
    throw ConfigError("fine_tune_devices: " + std::to_string(inits.size()) + " devices but " +
                      std::to_string(shards.size()) + " shards");
  }
  if (init == DeviceInit::kFull && public_corpus == nullptr) {
    throw ConfigError("T_full devices need the public corpus");
  }
  std::vector<Device> out;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    Device d;
    d.id = static_cast<std::uint32_t>(i);
    DeviceReport rep;
    rep.device = d.id;
    const bool has_eval = eval.size() >= 2;
    if (shards[i].size() < 2) {
      d.active = false;
      rep.excluded = true;
      if (warnings != nullptr) *warnings << "warning: device " << i << " has an empty shard; excluded\n";
      d.model = std::move(inits[i]);
    } else {
      if (has_eval) rep.bpc_init = bpc(inits[i], eval);
      SymbolSeq data = shards[i];
      if (init == DeviceInit::kFull) {
        data = *public_corpus;
        data.insert(data.end(), shards[i].begin(), shards[i].end());
      }
      TrainResult r = train(std::move(inits[i]), TrainingStream::hard(data), cfg);
      d.model = std::move(r.params);
      if (has_eval) rep.bpc_tuned = bpc(d.model, eval);
    }
    if (report != nullptr) report->push_back(rep);
    out.push_back(std::move(d));
  }
  return out;
}

SoftLabelSeq aggregate(const std::vector<const SoftLabelSeq*>& labels) {
  if (labels.empty()) throw DataError("aggregate: no label sequences");
  const std::size_t n = labels.front()->size();
  for (const auto* l : labels) {
    if (l->size() != n) {
      throw DataError("aggregate: label lengths differ (" + std::to_string(n) + " vs " +
                      std::to_string(l->size()) + ")");
    }
  }
  const double count = static_cast<double>(labels.size());
  SoftLabelSeq out(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (int k = 0; k < kVocabSize; ++k) {
      double s = 0.0;
      for (const auto* l : labels) s += (*l)[t].p[k];
      out[t].p[k] = s / count;
    }
  }
  return out;
}

EnsembleScores ensemble_eval(const std::vector<const ModelParams*>& devices, const SymbolSeq& eval) {
  if (devices.empty()) throw ConfigError("ensemble_eval needs at least one device");
  if (eval.size() < 2) throw DataError("ensemble_eval needs at least two symbols");
  const std::size_t steps = eval.size() - 1;
  std::vector<std::vector<double>> probs;
  for (const auto* d : devices) {
    ScoredSequence s = score_sequence(*d, eval, ModelState::zeros(d->spec));
    std::vector<double> p(steps);
    for (std::size_t t = 0; t < steps; ++t) p[t] = s.labels[t].p[eval[t + 1]];
    probs.push_back(std::move(p));
  }
  const double count = static_cast<double>(devices.size());
  EnsembleScores out;
  double a = 0.0;
  for (const auto& p : probs) {
    double total = 0.0;
    for (double x : p) total -= std::log2(x);
    a += total / static_cast<double>(steps);
  }
  out.average = a / count;
  double e = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double s = 0.0;
    for (const auto& p : probs) s += p[t];
    e -= std::log2(s / count);
  }
  out.ensemble = e / static_cast<double>(steps);
  return out;
}

std::uint32_t select_generator(std::uint64_t seed, std::size_t round, std::size_t n_devices) {
  if (n_devices == 0) throw ConfigError("select_generator needs at least one device");
  Rng r = Rng(seed).split(0x5e1ec7000ULL + round);
  return static_cast<std::uint32_t>(r.below(n_devices));
}

Federation::Federation(ModelParams server, std::vector<Device> devices, FederationConfig cfg)
    : cfg_(std::move(cfg)),
      devices_(std::move(devices)),
      trainer_(std::move(server), lot_train_config(cfg_.transfer)),
      net_(devices_.size(), cfg_.quantize_labels) {
  if (devices_.size() != cfg_.n_devices) {
    throw ConfigError("federation: config names " + std::to_string(cfg_.n_devices) +
                      " devices but " + std::to_string(devices_.size()) + " were given");
  }
  cfg_.validate();
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    if (devices_[i].id != i) throw ConfigError("device ids must be 0..n-1 in order");
    if (!(devices_[i].model.spec.vocab_size == trainer_.params().spec.vocab_size)) {
      throw DataError("device " + std::to_string(i) + " vocabulary differs from the server");
    }
  }
}

std::vector<SoftLabelSeq> Federation::score_on_devices(const std::vector<std::uint32_t>& who,
                                                       const std::vector<SymbolSeq>& texts) {
  std::vector<SoftLabelSeq> out(who.size());
  auto work = [&](std::size_t k) { out[k] = teacher_labels(devices_[who[k]].model, texts[k]); };
  if (cfg_.concurrent_devices && who.size() > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::thread> pool;
    pool.reserve(who.size());
    for (std::size_t k = 0; k < who.size(); ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t k = 0; k < who.size(); ++k) work(k);
  }
  return out;
}

RoundReport Federation::finish_round(std::size_t round, const SymbolSeq& text,
                                     std::uint32_t generator) {
  const auto r32 = static_cast<std::uint32_t>(round);
  // Devices read their inboxes; the generator already holds its own text.
  std::vector<std::uint32_t> responders;
  std::vector<SymbolSeq> texts;
  for (const auto& d : devices_) {
    if (!d.active) continue;
    SymbolSeq mine;
    bool have = d.id == generator;
    if (have) mine = text;
    for (auto& m : net_.drain(Role::device_role(d.id))) {
      if (auto* lot = std::get_if<TextLot>(&m); lot != nullptr && lot->round == r32) {
        mine = std::move(lot->text);
        have = true;
      }
    }
    if (!have || cfg_.dropouts.count({round, d.id}) > 0) continue;
    responders.push_back(d.id);
    texts.push_back(std::move(mine));
  }
  std::vector<SoftLabelSeq> labels = score_on_devices(responders, texts);
  for (std::size_t k = 0; k < responders.size(); ++k) {
    dist_.check(labels[k]);
    net_.send(Role::device_role(responders[k]), Role::aggregator(),
              SoftLabelLot{r32, 0, responders[k], std::move(labels[k])});
  }

  // Aggregator: one lot per round, summed in device order.
  std::vector<SoftLabelLot> received;
  for (auto& m : net_.drain(Role::aggregator())) {
    if (auto* l = std::get_if<SoftLabelLot>(&m); l != nullptr && l->round == r32) {
      received.push_back(std::move(*l));
    }
  }
  std::sort(received.begin(), received.end(),
            [](const SoftLabelLot& a, const SoftLabelLot& b) { return a.sender < b.sender; });
  RoundReport rep;
  rep.round = round;
  rep.generator = generator;
  rep.responders = received.size();
  rep.lot_chars = text.size();
  if (!received.empty()) {
    std::vector<const SoftLabelSeq*> ptrs;
    for (const auto& l : received) {
      dist_.check(l.labels);
      ptrs.push_back(&l.labels);
    }
    AggregatedLabels agg{r32, 0, static_cast<std::uint32_t>(received.size()), aggregate(ptrs)};
    dist_.check(agg.labels);
    net_.send(Role::aggregator(), Role::server(), agg);
  }

  // Server: train one lot on its text and the aggregated labels.
  SymbolSeq server_text = generator == kServerId ? text : SymbolSeq{};
  SoftLabelSeq server_labels;
  bool have_labels = false;
  for (auto& m : net_.drain(Role::server())) {
    if (auto* lot = std::get_if<TextLot>(&m); lot != nullptr && lot->round == r32) {
      server_text = std::move(lot->text);
    } else if (auto* a = std::get_if<AggregatedLabels>(&m); a != nullptr && a->round == r32) {
      dist_.check(a->labels);
      server_labels = std::move(a->labels);
      have_labels = true;
    }
  }
  if (have_labels) {
    if (server_labels.size() != server_text.size()) {
      throw DataError("round " + std::to_string(round) + ": aggregated labels do not match the lot");
    }
    trainer_.fit(TrainingStream::from_generated(server_text, std::move(server_labels)));
  }
  rep.server_frames = trainer_.frames();
  return rep;
}

RoundReport Federation::run_round_sdgkt(std::size_t round) {
  SampledText lot =
      generate_lot(trainer_.params(), cfg_.transfer.lot_chars, lot_seed(cfg_.transfer.seed, round), cfg_.transfer);
  dist_.check(lot.labels);
  const TextLot msg{static_cast<std::uint32_t>(round), 0, kServerId, lot.ids};
  for (const auto& d : devices_) {
    if (d.active) net_.send(Role::server(), Role::device_role(d.id), msg);
  }
  return finish_round(round, lot.ids, kServerId);
}

RoundReport Federation::run_round_tdgkt(std::size_t round) {
  std::vector<std::uint32_t> active;
  for (const auto& d : devices_) {
    if (d.active) active.push_back(d.id);
  }
  if (active.empty()) throw DataError("no active devices");
  const std::uint32_t g = active[select_generator(cfg_.transfer.seed, round, active.size())];
  SampledText lot = generate_lot(devices_[g].model, cfg_.transfer.lot_chars,
                                 lot_seed(cfg_.transfer.seed, round), cfg_.transfer);
  dist_.check(lot.labels);
  const TextLot msg{static_cast<std::uint32_t>(round), 0, g, lot.ids};
  net_.send(Role::device_role(g), Role::server(), msg);
  for (std::uint32_t id : active) {
    if (id != g) net_.send(Role::device_role(g), Role::device_role(id), msg);
  }
  return finish_round(round, lot.ids, g);
}

RoundReport Federation::run_round(std::size_t round) {
  return cfg_.transfer.mode == TransferMode::kTeacherDriven ? run_round_tdgkt(round)
                                                            : run_round_sdgkt(round);
}

FederationResult Federation::run(const EvalSets& eval) {
  auto score = [&](RoundReport& r) {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    const ModelParams& p = trainer_.params();
    r.bpc_full = eval.full.size() >= 2 ? bpc(p, eval.full) : nan;
    r.bpc_private = eval.private_set.size() >= 2 ? bpc(p, eval.private_set) : nan;
    r.bpc_public = eval.public_set.size() >= 2 ? bpc(p, eval.public_set) : nan;
    return std::isnan(r.bpc_full) ? r.bpc_private : r.bpc_full;
  };
  FederationResult res;
  RoundReport initial;
  initial.server_frames = trainer_.frames();
  double best = score(initial);
  res.rounds.push_back(initial);
  std::size_t stale = 0;
  for (std::size_t round = 1; round <= cfg_.rounds; ++round) {
    RoundReport r = run_round(round);
    const double metric = score(r);
    res.rounds.push_back(r);
    if (metric < best || std::isnan(best)) {
      best = metric;
      stale = 0;
    } else if (cfg_.patience > 0 && ++stale >= cfg_.patience) {
      break;
    }
  }
  res.server = trainer_.params();
  res.routing = net_.audit();
  res.distributions = dist_;
  res.transcript_hash = net_.transcript_hash();
  return res;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_rounds_csv(const std::string& path, const std::vector<RoundReport>& rounds,
                      TransferMode mode) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << kFederationRoundsCsvHeader << '\n';
  for (const auto& r : rounds) {
    out << r.round << ',' << to_string(mode) << ','
        << (r.generator == kServerId ? std::string("server") : std::to_string(r.generator)) << ','
        << r.responders << ',' << r.lot_chars << ',' << r.server_frames << ',' << num(r.bpc_full)
        << ',' << num(r.bpc_private) << ',' << num(r.bpc_public) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_ensemble_csv(const std::string& path, std::size_t n_devices, DeviceInit init,
                        const EnsembleScores& scores) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << kEnsembleCsvHeader << '\n'
      << n_devices << ',' << to_string(init) << ',' << num(scores.average) << ','
      << num(scores.ensemble) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace gkt
