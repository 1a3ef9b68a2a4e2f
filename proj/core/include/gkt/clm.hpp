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

#ifndef GKT_CLM_HPP
#define GKT_CLM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gkt/corpus.hpp"
#include "gkt/numkernel.hpp"

namespace gkt {

/// N x M model: M stacked LSTM layers of N cells over the 30-symbol
/// alphabet.
struct ModelSpec {
  int cells = 0;
  int layers = 0;
  int vocab_size = kVocabSize;

  void validate() const;
  // "256x2" -> {256 cells, 2 layers}
  static ModelSpec parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const ModelSpec&) const = default;
};

/// All trainable weights. Flattened order (checkpoints, optimizer state):
/// for each layer bottom-up {w_input, w_recurrent, bias}, then w_out, b_out;
/// matrices row-major.
struct ModelParams {
  ModelSpec spec;
  std::vector<LstmCellParams> layers;
  Matrix w_out;  // vocab x cells
  Vector b_out;  // vocab

  static ModelParams zeros(const ModelSpec& spec);
  static ModelParams init(const ModelSpec& spec, std::uint64_t seed, double scale = 0.08,
                          double forget_bias = 1.0);

  std::size_t size() const;
  void check_shapes() const;
  void set_zero();
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  // Calls f(double* data, std::size_t n) for each block in flattened order.
  template <typename F>
  void visit(F&& f) {
    for (auto& l : layers) {
      f(l.w_input.data(), static_cast<std::size_t>(l.w_input.size()));
      f(l.w_recurrent.data(), static_cast<std::size_t>(l.w_recurrent.size()));
      f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    f(w_out.data(), static_cast<std::size_t>(w_out.size()));
    f(b_out.data(), static_cast<std::size_t>(b_out.size()));
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit([&](double* d, std::size_t n) {
      f(static_cast<const double*>(d), n);
    });
  }
};

struct ModelState {
  std::vector<LstmCellState> layers;

  static ModelState zeros(const ModelSpec& spec, int batch = 1);
  int batch() const { return layers.empty() ? 0 : layers.front().batch(); }
};

/// Next-symbol distribution over the 30 symbols.
struct Distribution {
  std::array<double, kVocabSize> p{};

  double& operator[](std::size_t k) { return p[k]; }
  double operator[](std::size_t k) const { return p[k]; }
  double sum() const;
  // Nonnegative, finite, and summing to 1 within `tol`.
  bool valid(double tol = 1e-9) const;
  std::size_t argmax() const;

  static Distribution uniform();
  static Distribution one_hot(SymbolId id);
  template <typename Row>
  static Distribution from_row(const Row& row) {
    Distribution d;
    for (int k = 0; k < kVocabSize; ++k) d.p[k] = row(k);
    return d;
  }
  bool operator==(const Distribution&) const = default;
};

using SoftLabelSeq = std::vector<Distribution>;

// Per-step values the trainer needs for backward.
struct StepTape {
  std::vector<LstmTape> layers;
};

/// One batched step: consumes x[b] for every stream b, advances `state`,
/// and returns batch x 30 logits. Records the step in `tape` if given.
Matrix forward_logits(const ModelParams& params, ModelState& state, std::span<const SymbolId> x,
                      StepTape* tape = nullptr);

/// P(x_{t+1} | x_{1:t}) given a state that encodes x_{1:t-1}; returns the
/// distribution and the state that now encodes x_{1:t}.
std::pair<Distribution, ModelState> next_distribution(const ModelParams& params,
                                                      const ModelState& state, SymbolId x);

struct ScoredSequence {
  SoftLabelSeq labels;             // labels[t]: after consuming s[0..=t]
  std::vector<double> log2_probs;  // log2 P(s[t+1]), one per scored position
  ModelState final_state;
};

ScoredSequence score_sequence(const ModelParams& params, const SymbolSeq& s,
                              const ModelState& initial);

/// Mean -log2 P(next symbol) over s[1..], from a zero state.
double bpc(const ModelParams& params, const SymbolSeq& s);

/// Label stream for generated text: labels[t] predicts text[t] given an
/// implicit leading EOS and text[0..t-1]. This is the alignment used by
/// sampled text, soft-label files, and federation label lots.
SoftLabelSeq teacher_labels(const ModelParams& params, const SymbolSeq& text);

struct SampleOptions {
  double temperature = 1.0;
  SymbolId prime = Vocab::kEos;
  // Force an EOS once a sentence reaches this many symbols; 0 disables.
  std::size_t max_sentence = 0;
};

struct SampledText {
  SymbolSeq ids;
  SoftLabelSeq labels;  // labels[t] is the distribution ids[t] was drawn from
  std::size_t forced_eos = 0;
};

/// Autoregressive sampling from a zero state primed with `opts.prime`.
/// Temperature divides the logits before the softmax.
SampledText sample_sequence(const ModelParams& params, std::size_t length, std::uint64_t seed,
                            const SampleOptions& opts = {});

/// `streams` independent samplers run in lockstep (stream k seeded by
/// Rng(seed).split(k)); results are concatenated stream by stream.
SampledText sample_streams(const ModelParams& params, std::size_t streams,
                           std::size_t length_per_stream, std::uint64_t seed,
                           const SampleOptions& opts = {});

}  // namespace gkt

#endif  // GKT_CLM_HPP
