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

#ifndef GKT_TRAINER_HPP
#define GKT_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gkt/clm.hpp"

namespace gkt {

// How Nesterov momentum composes with the Adadelta-conditioned step.
enum class MomentumOrder {
  kAdadeltaThenNesterov,  // momentum over lr * adadelta_delta(g)
  kNesterovThenAdadelta,  // adadelta over the Nesterov look-ahead gradient
};

struct TrainConfig {
  std::size_t bptt_window = 64;
  std::size_t batch_streams = 32;
  double lr = 1.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  double momentum = 0.9;
  MomentumOrder order = MomentumOrder::kAdadeltaThenNesterov;
  std::size_t max_updates = 1000;
  // Stop after this many passes over the data; 0 means no pass limit.
  std::size_t max_passes = 0;
  // Evaluate every this many updates (and after the last); 0 disables.
  std::size_t eval_every = 100;
  std::uint64_t seed = 1;
  // Global-norm clip on the mean gradient; <= 0 disables.
  double clip_norm = 5.0;
  // Return the snapshot with the best evaluation instead of the last one.
  bool keep_best = true;

  void validate() const;
};

/// Adadelta accumulators and momentum velocity, one entry per parameter in
/// ModelParams flattened order.
struct OptimizerState {
  std::vector<double> eg2;
  std::vector<double> edx2;
  std::vector<double> velocity;
  std::uint64_t steps = 0;

  static OptimizerState zeros(std::size_t n);
  std::size_t size() const { return eg2.size(); }
};

/// Input symbols with aligned targets: targets[t] is what the model should
/// predict after consuming inputs[t].
struct TrainingStream {
  SymbolSeq inputs;
  std::variant<SymbolSeq, SoftLabelSeq> targets;

  // inputs = text[0..n-2], hard targets = text[1..n-1]
  static TrainingStream hard(const SymbolSeq& text);
  static TrainingStream soft(SymbolSeq inputs, SoftLabelSeq labels);
  // Text and labels in generated-text alignment (see teacher_labels()):
  // inputs = prime followed by text[0..n-2].
  static TrainingStream from_generated(const SymbolSeq& text, SoftLabelSeq labels,
                                       SymbolId prime = Vocab::kEos);

  std::size_t size() const { return inputs.size(); }
  bool is_soft() const { return std::holds_alternative<SoftLabelSeq>(targets); }
  void validate() const;
};

// Probability floor inside the log; hits are counted, never silently lost.
inline constexpr double kProbFloor = 1e-12;

struct LossResult {
  double loss = 0.0;  // nats
  Vector grad;        // d loss / d logits
  bool clamped = false;
};

// -ln pred[target]; gradient pred - onehot(target).
LossResult loss_hard(const Distribution& pred, SymbolId target);
// H(target, pred) = -sum target_i ln pred_i; gradient pred - target.
LossResult loss_soft(const Distribution& pred, const Distribution& target);
double entropy(const Distribution& d);  // nats

/// Stream b covers positions [starts[b], starts[b] + length) of `data`.
struct WindowBatch {
  const TrainingStream* data = nullptr;
  std::vector<std::size_t> starts;
  std::size_t length = 0;
};

struct WindowGradient {
  double loss = 0.0;  // mean nats per frame
  std::size_t frames = 0;
  std::size_t clamped = 0;
};

/// Mean window loss and its gradient (written to `grads`, which is
/// overwritten). `carried` starts the forward and receives the final
/// state; no gradient flows into the carried-in state.
WindowGradient window_gradient(const ModelParams& params, const WindowBatch& window,
                               ModelState& carried, ModelParams& grads);

/// Optimizer step on a flat gradient; returns the delta added to the
/// parameters and updates `opt`.
std::vector<double> adadelta_nesterov_step(std::span<const double> grads, OptimizerState& opt,
                                           const TrainConfig& cfg);

struct UpdateResult {
  double loss = 0.0;
  std::size_t frames = 0;
  bool clipped = false;
  std::size_t clamped = 0;
};

/// Forward/backward over one window from `carried`, then a single
/// optimizer step. Throws NumericalError (naming `offset`) on a non-finite
/// loss, leaving params and opt untouched.
UpdateResult bptt_update(ModelParams& params, OptimizerState& opt, const WindowBatch& window,
                         ModelState& carried, const TrainConfig& cfg, std::size_t offset = 0);

struct LogRow {
  std::uint64_t updates = 0;
  std::uint64_t frames = 0;
  double train_loss_nats = 0.0;
  double valid_bpc = std::numeric_limits<double>::quiet_NaN();
  double wallclock_s = 0.0;
};

// Returns the selection metric (lower is better), usually validation BPC.
using Evaluator = std::function<double(const ModelParams&, std::uint64_t frames)>;

struct TrainResult {
  ModelParams params;  // best snapshot if keep_best and evaluated, else last
  std::vector<LogRow> log;
  std::uint64_t updates = 0;
  std::uint64_t frames = 0;
  std::size_t clip_events = 0;
  std::size_t clamped = 0;
};

/// Stateful trainer: owns the parameters, optimizer state, and frame and
/// update counters so consecutive fit() calls continue where they left off.
class Trainer {
 public:
  Trainer(ModelParams init, TrainConfig cfg, OptimizerState opt = {});

  /// Trains on `data` with batch_streams contiguous slices and
  /// non-overlapping windows until max_updates or max_passes is reached.
  TrainResult fit(const TrainingStream& data, const Evaluator& eval = {});

  const ModelParams& params() const { return params_; }
  const OptimizerState& optimizer() const { return opt_; }
  const TrainConfig& config() const { return cfg_; }
  TrainConfig& config() { return cfg_; }
  std::uint64_t frames() const { return frames_; }
  std::uint64_t updates() const { return updates_; }
  void set_counters(std::uint64_t updates, std::uint64_t frames) {
    updates_ = updates;
    frames_ = frames;
  }

 private:
  ModelParams params_;
  TrainConfig cfg_;
  OptimizerState opt_;
  std::uint64_t updates_ = 0;
  std::uint64_t frames_ = 0;
};

TrainResult train(ModelParams init, const TrainingStream& data, const TrainConfig& cfg,
                  const Evaluator& eval = {});

// Columns: updates,frames,train_loss_nats,valid_bpc,wallclock_s
void write_convergence_csv(const std::string& path, const std::vector<LogRow>& log);
inline constexpr const char* kConvergenceCsvHeader =
    "updates,frames,train_loss_nats,valid_bpc,wallclock_s";

}  // namespace gkt

#endif  // GKT_TRAINER_HPP
