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

#include "gkt/clm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "gkt/errors.hpp"
#include "gkt/rng.hpp"

namespace gkt {

void ModelSpec::validate() const {
  if (cells < 1 || layers < 1) {
    throw ConfigError("model spec needs at least 1 cell and 1 layer, got " + to_string());
  }
  if (vocab_size != kVocabSize) {
    throw ConfigError("model vocab size must be " + std::to_string(kVocabSize));
  }
}

ModelSpec ModelSpec::parse(std::string_view text) {
  auto x = text.find_first_of("xX");
  ModelSpec spec;
  if (x == std::string_view::npos) throw ConfigError("model spec must look like 256x2: " + std::string(text));
  auto a = text.substr(0, x);
  auto b = text.substr(x + 1);
  auto r1 = std::from_chars(a.data(), a.data() + a.size(), spec.cells);
  auto r2 = std::from_chars(b.data(), b.data() + b.size(), spec.layers);
  if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || r2.ec != std::errc() ||
      r2.ptr != b.data() + b.size()) {
    throw ConfigError("model spec must look like 256x2: " + std::string(text));
  }
  spec.validate();
  return spec;
}

std::string ModelSpec::to_string() const {
  return std::to_string(cells) + "x" + std::to_string(layers);
}

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  spec.validate();
  ModelParams p;
  p.spec = spec;
  for (int l = 0; l < spec.layers; ++l) {
    p.layers.push_back(LstmCellParams::zeros(spec.cells, l == 0 ? spec.vocab_size : spec.cells));
  }
  p.w_out = Matrix::Zero(spec.vocab_size, spec.cells);
  p.b_out = Vector::Zero(spec.vocab_size);
  return p;
}

ModelParams ModelParams::init(const ModelSpec& spec, std::uint64_t seed, double scale,
                              double forget_bias) {
  spec.validate();
  Rng rng(seed);
  ModelParams p;
  p.spec = spec;
  for (int l = 0; l < spec.layers; ++l) {
    p.layers.push_back(LstmCellParams::uniform(spec.cells, l == 0 ? spec.vocab_size : spec.cells,
                                               rng, scale, forget_bias));
  }
  p.w_out = Matrix::Zero(spec.vocab_size, spec.cells);
  for (Eigen::Index i = 0; i < p.w_out.size(); ++i) p.w_out.data()[i] = rng.uniform(-scale, scale);
  p.b_out = Vector::Zero(spec.vocab_size);
  return p;
}

std::size_t ModelParams::size() const {
  std::size_t n = 0;
  visit([&](const double*, std::size_t k) { n += k; });
  return n;
}

void ModelParams::check_shapes() const {
  spec.validate();
  if (static_cast<int>(layers.size()) != spec.layers) {
    throw DimensionError("model has " + std::to_string(layers.size()) + " layers, spec says " +
                         spec.to_string());
  }
  for (int l = 0; l < spec.layers; ++l) {
    const auto& lp = layers[static_cast<std::size_t>(l)];
    lp.check_shapes();
    if (lp.cells != spec.cells || lp.input_dim != (l == 0 ? spec.vocab_size : spec.cells)) {
      throw DimensionError("layer " + std::to_string(l) + " does not match spec " + spec.to_string());
    }
  }
  if (w_out.rows() != spec.vocab_size || w_out.cols() != spec.cells || b_out.size() != spec.vocab_size) {
    throw DimensionError("output projection does not match spec " + spec.to_string());
  }
}

void ModelParams::set_zero() {
  visit([](double* d, std::size_t n) { std::fill(d, d + n, 0.0); });
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  visit([&](const double* d, std::size_t n) { out.insert(out.end(), d, d + n); });
  return out;
}

void ModelParams::assign(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw DimensionError("parameter vector has " + std::to_string(flat.size()) + " entries, model " +
                         spec.to_string() + " needs " + std::to_string(size()));
  }
  std::size_t off = 0;
  visit([&](double* d, std::size_t n) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), n, d);
    off += n;
  });
}

ModelState ModelState::zeros(const ModelSpec& spec, int batch) {
  ModelState s;
  for (int l = 0; l < spec.layers; ++l) s.layers.push_back(LstmCellState::zeros(batch, spec.cells));
  return s;
}

double Distribution::sum() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

bool Distribution::valid(double tol) const {
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return std::abs(sum() - 1.0) <= tol;
}

std::size_t Distribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

Distribution Distribution::uniform() {
  Distribution d;
  d.p.fill(1.0 / kVocabSize);
  return d;
}

Distribution Distribution::one_hot(SymbolId id) {
  Distribution d;
  d.p[id] = 1.0;
  return d;
}

Matrix forward_logits(const ModelParams& params, ModelState& state, std::span<const SymbolId> x,
                      StepTape* tape) {
  const int batch = static_cast<int>(x.size());
  if (state.batch() != batch || static_cast<int>(state.layers.size()) != params.spec.layers) {
    throw DimensionError("forward_logits: state does not match batch " + std::to_string(batch) +
                         " and spec " + params.spec.to_string());
  }
  Matrix input = Matrix::Zero(batch, params.spec.vocab_size);
  for (int b = 0; b < batch; ++b) {
    if (!Vocab::valid(x[b])) throw DataError("invalid symbol id " + std::to_string(x[b]));
    input(b, x[b]) = 1.0;
  }
  if (tape != nullptr) tape->layers.resize(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    state.layers[l] = lstm_cell_forward(params.layers[l], input, state.layers[l],
                                        tape != nullptr ? &tape->layers[l] : nullptr);
    input = state.layers[l].h;
  }
  Matrix logits(batch, params.spec.vocab_size);
  logits.noalias() = input * params.w_out.transpose();
  logits.rowwise() += params.b_out.transpose();
  return logits;
}

std::pair<Distribution, ModelState> next_distribution(const ModelParams& params,
                                                      const ModelState& state, SymbolId x) {
  ModelState next = state;
  Matrix logits = forward_logits(params, next, std::span(&x, 1));
  softmax_rows(logits);
  return {Distribution::from_row(logits.row(0)), std::move(next)};
}

ScoredSequence score_sequence(const ModelParams& params, const SymbolSeq& s,
                              const ModelState& initial) {
  ScoredSequence out;
  out.final_state = initial;
  out.labels.reserve(s.size());
  out.log2_probs.reserve(s.empty() ? 0 : s.size() - 1);
  for (std::size_t t = 0; t < s.size(); ++t) {
    Matrix probs = forward_logits(params, out.final_state, std::span(&s[t], 1));
    softmax_rows(probs);
    out.labels.push_back(Distribution::from_row(probs.row(0)));
    if (t + 1 < s.size()) out.log2_probs.push_back(std::log2(out.labels.back()[s[t + 1]]));
  }
  return out;
}

double bpc(const ModelParams& params, const SymbolSeq& s) {
  if (s.size() < 2) throw DataError("bpc needs a sequence of at least 2 symbols");
  ModelState state = ModelState::zeros(params.spec);
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    Matrix probs = forward_logits(params, state, std::span(&s[t], 1));
    softmax_rows(probs);
    total -= std::log2(probs(0, s[t + 1]));
  }
  return total / static_cast<double>(s.size() - 1);
}

SoftLabelSeq teacher_labels(const ModelParams& params, const SymbolSeq& text) {
  SoftLabelSeq out;
  out.reserve(text.size());
  ModelState state = ModelState::zeros(params.spec);
  SymbolId x = Vocab::kEos;
  for (std::size_t t = 0; t < text.size(); ++t) {
    Matrix probs = forward_logits(params, state, std::span(&x, 1));
    softmax_rows(probs);
    out.push_back(Distribution::from_row(probs.row(0)));
    x = text[t];
  }
  return out;
}

namespace {

void apply_temperature(Matrix& logits, double temperature) {
  if (temperature != 1.0) logits /= temperature;
  softmax_rows(logits);
}

}  // namespace

SampledText sample_sequence(const ModelParams& params, std::size_t length, std::uint64_t seed,
                            const SampleOptions& opts) {
  return sample_streams(params, 1, length, seed, opts);
}

SampledText sample_streams(const ModelParams& params, std::size_t streams,
                           std::size_t length_per_stream, std::uint64_t seed,
                           const SampleOptions& opts) {
  if (!(opts.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (streams < 1 || length_per_stream < 1) throw ConfigError("sample length must be positive");
  const int batch = static_cast<int>(streams);

  std::vector<Rng> rngs;
  if (streams == 1) {
    rngs.emplace_back(seed);
  } else {
    Rng root(seed);
    for (std::size_t k = 0; k < streams; ++k) rngs.push_back(root.split(k));
  }

  ModelState state = ModelState::zeros(params.spec, batch);
  std::vector<SymbolId> x(streams, opts.prime);
  std::vector<std::size_t> run(streams, 0);
  std::vector<SymbolSeq> ids(streams);
  std::vector<SoftLabelSeq> labels(streams);
  std::size_t forced = 0;
  for (std::size_t k = 0; k < streams; ++k) {
    ids[k].reserve(length_per_stream);
    labels[k].reserve(length_per_stream);
  }

  for (std::size_t t = 0; t < length_per_stream; ++t) {
    Matrix probs = forward_logits(params, state, x);
    apply_temperature(probs, opts.temperature);
    for (std::size_t k = 0; k < streams; ++k) {
      Distribution d = Distribution::from_row(probs.row(static_cast<Eigen::Index>(k)));
      auto id = static_cast<SymbolId>(rngs[k].categorical(d.p));
      if (opts.max_sentence > 0 && id != Vocab::kEos && run[k] + 1 >= opts.max_sentence) {
        id = Vocab::kEos;
        ++forced;
      }
      run[k] = id == Vocab::kEos ? 0 : run[k] + 1;
      ids[k].push_back(id);
      labels[k].push_back(d);
      x[k] = id;
    }
  }

  SampledText out;
  out.forced_eos = forced;
  out.ids.reserve(streams * length_per_stream);
  out.labels.reserve(streams * length_per_stream);
  for (std::size_t k = 0; k < streams; ++k) {
    out.ids.insert(out.ids.end(), ids[k].begin(), ids[k].end());
    out.labels.insert(out.labels.end(), labels[k].begin(), labels[k].end());
  }
  return out;
}

}  // namespace gkt
