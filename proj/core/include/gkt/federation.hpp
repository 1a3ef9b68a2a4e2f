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

#ifndef GKT_FEDERATION_HPP
#define GKT_FEDERATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gkt/clm.hpp"
#include "gkt/hash.hpp"
#include "gkt/trainer.hpp"
#include "gkt/transfer.hpp"
#include "gkt/wire.hpp"

namespace gkt {

struct Role {
  enum class Kind : std::uint8_t { kServer, kDevice, kAggregator };
  Kind kind = Kind::kServer;
  std::uint32_t device = 0;  // meaningful for kDevice only

  static Role server() { return {Kind::kServer, 0}; }
  static Role aggregator() { return {Kind::kAggregator, 0}; }
  static Role device_role(std::uint32_t id) { return {Kind::kDevice, id}; }

  // Wire sender id: device index, kServerId, or kAggregatorId.
  std::uint32_t wire_id() const;
  std::string to_string() const;
  bool operator==(const Role&) const = default;
  auto operator<=>(const Role&) const = default;
};

// Raised when a send is not permitted by the routing table.
class RoutingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class DeviceInit { kFull, kTransfer, kPrivate };
DeviceInit parse_device_init(const std::string& s);  // "full" | "transfer" | "private"
std::string to_string(DeviceInit d);

struct FederationConfig {
  std::size_t n_devices = 10;
  DeviceInit device_init = DeviceInit::kTransfer;
  std::size_t rounds = 10;
  // Stop once server validation BPC has not improved for this many rounds; 0 disables.
  std::size_t patience = 5;
  // Server-side lot generation and training; transfer.lot_chars is the lot size.
  GktConfig transfer;
  // Deliver labels through the f32 wire codec (false: exact 64-bit delivery).
  bool quantize_labels = true;
  // (round, device) pairs that do not respond in that round.
  std::set<std::pair<std::size_t, std::uint32_t>> dropouts;
  // Score lots on one thread per device.
  bool concurrent_devices = true;

  void validate() const;
};

/// Per-type delivery counts for one destination role kind.
struct DeliveryCounts {
  std::size_t text_lots = 0;
  std::size_t soft_label_lots = 0;
  std::size_t aggregated = 0;
};

struct RoutingAudit {
  DeliveryCounts to_server;
  DeliveryCounts to_devices;
  DeliveryCounts to_aggregator;
  std::size_t rejected = 0;  // sends refused by the routing table
  std::size_t messages = 0;
  std::uint64_t bytes = 0;

  // Per-device labels at the server plus text at the aggregator.
  std::size_t violations() const {
    return to_server.soft_label_lots + to_aggregator.text_lots;
  }
};

/// Counters over every distribution checked during a run.
struct DistributionAudit {
  std::uint64_t positions = 0;
  std::uint64_t invalid = 0;
  double max_sum_error = 0.0;
  double min_entry = 1.0;

  void check(const Distribution& d, double tol = 1e-9);
  void check(const SoftLabelSeq& s, double tol = 1e-9) {
    for (const auto& d : s) check(d, tol);
  }
  void merge(const DistributionAudit& o);
};

/// In-process network: per-role mailboxes behind a fixed routing table.
/// Text lots may reach devices and the server; per-device soft labels only
/// the aggregator; aggregated labels only the server.
class SimNetwork {
 public:
  SimNetwork(std::size_t n_devices, bool quantize_labels);

  static bool permitted(MessageType type, const Role& from, const Role& to);

  /// Delivers `m` to `to` or throws RoutingViolation without delivering.
  void send(const Role& from, const Role& to, const Message& m);
  std::vector<Message> drain(const Role& who);
  std::size_t pending(const Role& who) const;

  const RoutingAudit& audit() const { return audit_; }
  // FNV-1a over (from, to, encoded frame) of every delivery in order.
  std::uint64_t transcript_hash() const { return hasher_.digest(); }
  std::string transcript_hex() const;

  // Optional JSON-lines mirror of every delivery.
  void set_mirror(std::ostream* out) { mirror_ = out; }

 private:
  std::size_t mailbox(const Role& r) const;

  std::size_t n_devices_;
  bool quantize_;
  std::vector<std::vector<Message>> boxes_;
  RoutingAudit audit_;
  Fnv1a hasher_;
  std::ostream* mirror_ = nullptr;
};

struct Bootstrap {
  ModelParams server;
  ModelParams device_template;
  TrainResult log;
};

/// One model trained on public data; the server starts from it, and so do
/// T_transfer devices.
Bootstrap bootstrap(const SymbolSeq& public_corpus, const ModelSpec& spec, const TrainConfig& cfg,
                    std::uint64_t seed, const Evaluator& eval = {});

/// Initial device parameters for the regime: template copies (T_transfer)
/// or seeded random inits (T_full, T_private).
std::vector<ModelParams> initial_devices(const Bootstrap& boot, DeviceInit init, std::size_t n,
                                         std::uint64_t seed);

struct DeviceReport {
  std::uint32_t device = 0;
  bool excluded = false;
  double bpc_init = 0.0;
  double bpc_tuned = 0.0;
};

struct Device {
  std::uint32_t id = 0;
  ModelParams model;
  bool active = true;
};

/// Trains device i on shard i only (T_full: public corpus followed by the
/// shard). Empty shards exclude the device. BPCs are measured on `eval`.
std::vector<Device> fine_tune_devices(std::vector<ModelParams> inits,
                                      const std::vector<SymbolSeq>& shards, const TrainConfig& cfg,
                                      DeviceInit init, const SymbolSeq* public_corpus,
                                      const SymbolSeq& eval, std::vector<DeviceReport>* report = nullptr,
                                      std::ostream* warnings = nullptr);

/// Position-wise arithmetic mean. Throws DataError if lengths differ.
SoftLabelSeq aggregate(const std::vector<const SoftLabelSeq*>& labels);

struct EnsembleScores {
  double average = 0.0;   // A: mean of member BPCs
  double ensemble = 0.0;  // E: BPC of the position-wise mean distribution
};

EnsembleScores ensemble_eval(const std::vector<const ModelParams*>& devices, const SymbolSeq& eval);

// Device that generates the lot in a teacher-driven round (1-based).
std::uint32_t select_generator(std::uint64_t seed, std::size_t round, std::size_t n_devices);

struct RoundReport {
  std::size_t round = 0;
  std::uint32_t generator = kServerId;
  std::size_t responders = 0;
  std::size_t lot_chars = 0;
  std::uint64_t server_frames = 0;
  double bpc_full = 0.0;
  double bpc_private = 0.0;
  double bpc_public = 0.0;
};

struct FederationResult {
  ModelParams server;
  std::vector<RoundReport> rounds;  // rounds[0] is the initial server
  RoutingAudit routing;
  DistributionAudit distributions;
  std::uint64_t transcript_hash = 0;
};

inline constexpr const char* kFederationRoundsCsvHeader =
    "round,mode,generator,responders,lot_chars,server_frames,bpc_full,bpc_private,bpc_public";
inline constexpr const char* kEnsembleCsvHeader =
    "n_devices,device_init,average_bpc,ensemble_bpc";

class Federation {
 public:
  Federation(ModelParams server, std::vector<Device> devices, FederationConfig cfg);

  // Server samples the lot; devices label it; the aggregator averages.
  RoundReport run_round_sdgkt(std::size_t round);
  // A seeded-random device samples the lot and broadcasts it.
  RoundReport run_round_tdgkt(std::size_t round);
  RoundReport run_round(std::size_t round);

  /// Rounds 1..cfg.rounds with evaluation after each; early stop on
  /// patience over `eval.full` (or private when full is empty).
  FederationResult run(const EvalSets& eval);

  const ModelParams& server() const { return trainer_.params(); }
  const SimNetwork& network() const { return net_; }
  SimNetwork& network() { return net_; }
  const DistributionAudit& distributions() const { return dist_; }
  const std::vector<Device>& devices() const { return devices_; }

 private:
  RoundReport finish_round(std::size_t round, const SymbolSeq& text, std::uint32_t generator);
  std::vector<SoftLabelSeq> score_on_devices(const std::vector<std::uint32_t>& who,
                                             const std::vector<SymbolSeq>& texts);

  FederationConfig cfg_;
  std::vector<Device> devices_;
  Trainer trainer_;
  SimNetwork net_;
  DistributionAudit dist_;
};

void write_rounds_csv(const std::string& path, const std::vector<RoundReport>& rounds,
                      TransferMode mode);
void write_ensemble_csv(const std::string& path, std::size_t n_devices, DeviceInit init,
                        const EnsembleScores& scores);

}  // namespace gkt

#endif  // GKT_FEDERATION_HPP
