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

#include "gkt/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

#include "gkt/errors.hpp"

namespace gkt {

void TrainConfig::validate() const {
  if (bptt_window < 2) throw ConfigError("bptt_window must be at least 2");
  if (batch_streams < 1) throw ConfigError("batch_streams must be at least 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and nonnegative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0)) throw ConfigError("adadelta_rho must be in (0, 1)");
  if (!(adadelta_eps > 0.0)) throw ConfigError("adadelta_eps must be positive");
}

OptimizerState OptimizerState::zeros(std::size_t n) {
  OptimizerState s;
  s.eg2.assign(n, 0.0);
  s.edx2.assign(n, 0.0);
  s.velocity.assign(n, 0.0);
  return s;
}

TrainingStream TrainingStream::hard(const SymbolSeq& text) {
  if (text.size() < 2) throw DataError("training text needs at least 2 symbols");
  TrainingStream s;
  s.inputs.assign(text.begin(), text.end() - 1);
  s.targets = SymbolSeq(text.begin() + 1, text.end());
  return s;
}

TrainingStream TrainingStream::soft(SymbolSeq inputs, SoftLabelSeq labels) {
  TrainingStream s;
  s.inputs = std::move(inputs);
  s.targets = std::move(labels);
  s.validate();
  return s;
}

TrainingStream TrainingStream::from_generated(const SymbolSeq& text, SoftLabelSeq labels,
                                              SymbolId prime) {
  if (text.empty()) throw DataError("generated text is empty");
  SymbolSeq inputs;
  inputs.reserve(text.size());
  inputs.push_back(prime);
  inputs.insert(inputs.end(), text.begin(), text.end() - 1);
  return soft(std::move(inputs), std::move(labels));
}

void TrainingStream::validate() const {
  const std::size_t n = std::visit([](const auto& t) { return t.size(); }, targets);
  if (n != inputs.size()) {
    throw DimensionError("target stream has " + std::to_string(n) + " entries for " +
                         std::to_string(inputs.size()) + " inputs");
  }
  if (const auto* labels = std::get_if<SoftLabelSeq>(&targets)) {
    for (std::size_t t = 0; t < labels->size(); ++t) {
      if (!(*labels)[t].valid(1e-6)) {
        throw DataError("soft target at position " + std::to_string(t) + " is not a distribution");
      }
    }
  } else {
    for (SymbolId id : std::get<SymbolSeq>(targets)) {
      if (!Vocab::valid(id)) throw DataError("invalid target id " + std::to_string(id));
    }
  }
}

LossResult loss_hard(const Distribution& pred, SymbolId target) {
  if (!Vocab::valid(target)) throw DataError("invalid target id " + std::to_string(target));
  LossResult r;
  double p = pred[target];
  if (p < kProbFloor) {
    p = kProbFloor;
    r.clamped = true;
  }
  r.loss = -std::log(p);
  r.grad = Vector(kVocabSize);
  for (int k = 0; k < kVocabSize; ++k) r.grad(k) = pred[static_cast<std::size_t>(k)];
  r.grad(target) -= 1.0;
  return r;
}

LossResult loss_soft(const Distribution& pred, const Distribution& target) {
  LossResult r;
  r.grad = Vector(kVocabSize);
  for (std::size_t k = 0; k < kVocabSize; ++k) {
    if (target[k] > 0.0) {
      double p = pred[k];
      if (p < kProbFloor) {
        p = kProbFloor;
        r.clamped = true;
      }
      r.loss -= target[k] * std::log(p);
    }
    r.grad(static_cast<Eigen::Index>(k)) = pred[k] - target[k];
  }
  return r;
}

double entropy(const Distribution& d) {
  double h = 0.0;
  for (double v : d.p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

WindowGradient window_gradient(const ModelParams& params, const WindowBatch& window,
                               ModelState& carried, ModelParams& grads) {
  if (window.data == nullptr || window.starts.empty() || window.length == 0) {
    throw DataError("window_gradient: empty window");
  }
  const TrainingStream& data = *window.data;
  const int batch = static_cast<int>(window.starts.size());
  const std::size_t steps = window.length;
  const int cells = params.spec.cells;
  for (std::size_t start : window.starts) {
    if (start + steps > data.size()) throw DataError("window runs past the end of the data");
  }
  if (carried.batch() != batch) {
    throw DimensionError("carried state batch " + std::to_string(carried.batch()) +
                         " does not match " + std::to_string(batch) + " streams");
  }
  if (grads.spec == params.spec && grads.layers.size() == params.layers.size()) {
    grads.set_zero();
  } else {
    grads = ModelParams::zeros(params.spec);
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(steps) * batch;
  std::vector<StepTape> tapes(steps);
  Matrix top(rows, cells);
  Matrix probs(rows, kVocabSize);
  std::vector<SymbolId> x(static_cast<std::size_t>(batch));

  for (std::size_t t = 0; t < steps; ++t) {
    for (int b = 0; b < batch; ++b) x[static_cast<std::size_t>(b)] = data.inputs[window.starts[b] + t];
    const Eigen::Index r0 = static_cast<Eigen::Index>(t) * batch;
    probs.middleRows(r0, batch) = forward_logits(params, carried, x, &tapes[t]);
    top.middleRows(r0, batch) = carried.layers.back().h;
  }
  softmax_rows(probs);

  // d loss / d logits, with the mean over frames folded in.
  WindowGradient out;
  out.frames = static_cast<std::size_t>(rows);
  const double scale = 1.0 / static_cast<double>(rows);
  Matrix dlogits = probs;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r = static_cast<Eigen::Index>(t) * batch + b;
      const std::size_t pos = window.starts[b] + t;
      if (const auto* hard = std::get_if<SymbolSeq>(&data.targets)) {
        const SymbolId y = (*hard)[pos];
        double p = probs(r, y);
        if (p < kProbFloor) {
          p = kProbFloor;
          ++out.clamped;
        }
        total -= std::log(p);
        dlogits(r, y) -= 1.0;
      } else {
        const Distribution& q = std::get<SoftLabelSeq>(data.targets)[pos];
        bool clamped = false;
        for (int k = 0; k < kVocabSize; ++k) {
          const double qk = q.p[static_cast<std::size_t>(k)];
          if (qk > 0.0) {
            double p = probs(r, k);
            if (p < kProbFloor) {
              p = kProbFloor;
              clamped = true;
            }
            total -= qk * std::log(p);
          }
          dlogits(r, k) -= qk;
        }
        out.clamped += clamped ? 1 : 0;
      }
    }
  }
  out.loss = total * scale;
  dlogits *= scale;

  grads.w_out.noalias() = dlogits.transpose() * top;
  grads.b_out = dlogits.colwise().sum().transpose();
  Matrix dtop(rows, cells);
  dtop.noalias() = dlogits * params.w_out;

  const std::size_t depth = params.layers.size();
  std::vector<Matrix> dh_next(depth, Matrix::Zero(batch, cells));
  std::vector<Matrix> dc_next(depth, Matrix::Zero(batch, cells));
  for (std::size_t t = steps; t-- > 0;) {
    Matrix dh_above = dtop.middleRows(static_cast<Eigen::Index>(t) * batch, batch);
    for (std::size_t l = depth; l-- > 0;) {
      Matrix dh = dh_above + dh_next[l];
      LstmInputGrads g =
          lstm_cell_backward(params.layers[l], tapes[t].layers[l], dh, dc_next[l], grads.layers[l]);
      dh_next[l] = std::move(g.dh_prev);
      dc_next[l] = std::move(g.dc_prev);
      dh_above = std::move(g.dx);
    }
  }
  return out;
}

std::vector<double> adadelta_nesterov_step(std::span<const double> grads, OptimizerState& opt,
                                           const TrainConfig& cfg) {
  if (opt.size() == 0) opt = OptimizerState::zeros(grads.size());
  if (opt.size() != grads.size() || opt.edx2.size() != grads.size() ||
      opt.velocity.size() != grads.size()) {
    throw DimensionError("optimizer state has " + std::to_string(opt.size()) +
                         " entries for " + std::to_string(grads.size()) + " gradients");
  }
  const double rho = cfg.adadelta_rho;
  const double eps = cfg.adadelta_eps;
  const double mu = cfg.momentum;
  std::vector<double> delta(grads.size());

  auto adadelta = [&](std::size_t k, double g) {
    opt.eg2[k] = rho * opt.eg2[k] + (1.0 - rho) * g * g;
    const double d = -std::sqrt(opt.edx2[k] + eps) / std::sqrt(opt.eg2[k] + eps) * g;
    opt.edx2[k] = rho * opt.edx2[k] + (1.0 - rho) * d * d;
    return d;
  };

  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (cfg.order == MomentumOrder::kAdadeltaThenNesterov) {
      const double step = cfg.lr * adadelta(k, grads[k]);
      opt.velocity[k] = mu * opt.velocity[k] + step;
      delta[k] = mu * opt.velocity[k] + step;
    } else {
      opt.velocity[k] = mu * opt.velocity[k] + grads[k];
      delta[k] = cfg.lr * adadelta(k, grads[k] + mu * opt.velocity[k]);
    }
  }
  ++opt.steps;
  return delta;
}

UpdateResult bptt_update(ModelParams& params, OptimizerState& opt, const WindowBatch& window,
                         ModelState& carried, const TrainConfig& cfg, std::size_t offset) {
  ModelParams grads = ModelParams::zeros(params.spec);
  ModelState state = carried;
  WindowGradient wg = window_gradient(params, window, state, grads);
  if (!std::isfinite(wg.loss)) {
    throw NumericalError("non-finite loss in window at offset " + std::to_string(offset));
  }

  std::vector<double> g = grads.flatten();
  double norm2 = 0.0;
  for (double v : g) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (!std::isfinite(norm)) {
    throw NumericalError("non-finite gradient in window at offset " + std::to_string(offset));
  }
  UpdateResult r;
  r.loss = wg.loss;
  r.frames = wg.frames;
  r.clamped = wg.clamped;
  if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) {
    const double s = cfg.clip_norm / norm;
    for (double& v : g) v *= s;
    r.clipped = true;
  }

  std::vector<double> delta = adadelta_nesterov_step(g, opt, cfg);
  std::size_t off = 0;
  params.visit([&](double* d, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      // Exact zero steps leave the stored bits alone (keeps -0.0 intact).
      if (delta[off + k] != 0.0) d[k] += delta[off + k];
    }
    off += n;
  });
  carried = std::move(state);
  return r;
}

Trainer::Trainer(ModelParams init, TrainConfig cfg, OptimizerState opt)
    : params_(std::move(init)), cfg_(cfg), opt_(std::move(opt)) {
  params_.check_shapes();
  cfg_.validate();
  if (opt_.size() == 0) opt_ = OptimizerState::zeros(params_.size());
  if (opt_.size() != params_.size()) {
    throw DimensionError("optimizer state does not match model " + params_.spec.to_string());
  }
}

TrainResult Trainer::fit(const TrainingStream& data, const Evaluator& eval) {
  cfg_.validate();
  data.validate();
  TrainResult res;
  if (cfg_.max_updates == 0) {
    res.params = params_;
    res.updates = updates_;
    res.frames = frames_;
    return res;
  }
  const std::size_t window = cfg_.bptt_window;
  if (data.size() < window) {
    throw DataError("training data (" + std::to_string(data.size()) +
                    " symbols) is shorter than the BPTT window (" + std::to_string(window) + ")");
  }
  const std::size_t streams = std::min(cfg_.batch_streams, data.size() / window);
  const std::size_t stream_len = data.size() / streams;
  std::vector<std::size_t> origin(streams);
  for (std::size_t b = 0; b < streams; ++b) origin[b] = b * stream_len;

  ModelState carried = ModelState::zeros(params_.spec, static_cast<int>(streams));
  WindowBatch batch{&data, origin, 0};
  std::size_t pos = 0;
  std::size_t passes = 0;
  std::size_t done = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;
  const auto t0 = std::chrono::steady_clock::now();

  while (done < cfg_.max_updates) {
    batch.length = std::min(window, stream_len - pos);
    for (std::size_t b = 0; b < streams; ++b) batch.starts[b] = origin[b] + pos;
    UpdateResult r = bptt_update(params_, opt_, batch, carried, cfg_, pos);
    ++done;
    ++updates_;
    frames_ += r.frames;
    res.clip_events += r.clipped ? 1 : 0;
    res.clamped += r.clamped;
    loss_sum += r.loss;
    ++loss_count;

    pos += batch.length;
    if (pos >= stream_len) {
      pos = 0;
      ++passes;
      carried = ModelState::zeros(params_.spec, static_cast<int>(streams));
    }
    const bool last = done == cfg_.max_updates || (cfg_.max_passes > 0 && passes >= cfg_.max_passes);
    if ((cfg_.eval_every > 0 && done % cfg_.eval_every == 0) || last) {
      LogRow row;
      row.updates = updates_;
      row.frames = frames_;
      row.train_loss_nats = loss_sum / static_cast<double>(loss_count);
      if (eval) {
        row.valid_bpc = eval(params_, frames_);
        if (cfg_.keep_best && row.valid_bpc < best) {
          best = row.valid_bpc;
          res.params = params_;
          have_best = true;
        }
      }
      row.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.log.push_back(row);
      loss_sum = 0.0;
      loss_count = 0;
    }
    if (last) break;
  }
  if (!have_best) res.params = params_;
  res.updates = updates_;
  res.frames = frames_;
  return res;
}

TrainResult train(ModelParams init, const TrainingStream& data, const TrainConfig& cfg,
                  const Evaluator& eval) {
  Trainer trainer(std::move(init), cfg);
  return trainer.fit(data, eval);
}

namespace {

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void write_convergence_csv(const std::string& path, const std::vector<LogRow>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << kConvergenceCsvHeader << '\n';
  for (const auto& r : log) {
    out << r.updates << ',' << r.frames << ',' << format_real(r.train_loss_nats) << ','
        << format_real(r.valid_bpc) << ',' << format_real(r.wallclock_s) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace gkt
