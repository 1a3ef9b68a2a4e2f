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

// Seeded end-to-end smoke trainings on tiny corpora.

#include <gtest/gtest.h>

#include <cmath>

#include "gkt/transfer.hpp"
#include "oracle.hpp"
#include "synthetic_corpus.hpp"

namespace gkt {
namespace {

SymbolSeq repeat(const std::string& unit, std::size_t n) {
  const SymbolSeq u = encode_canonical(unit);
  SymbolSeq s;
  while (s.size() < n) s.insert(s.end(), u.begin(), u.end());
  s.resize(n);
  return s;
}

TrainConfig small_config(std::size_t batch, std::size_t window, std::size_t updates) {
  TrainConfig cfg;
  cfg.batch_streams = batch;
  cfg.bptt_window = window;
  cfg.max_updates = updates;
  cfg.eval_every = 0;
  cfg.keep_best = false;
  return cfg;
}

const ModelParams& ab_teacher() {
  static const ModelParams teacher = [] {
    const TrainConfig cfg = small_config(4, 24, 300);
    return train(ModelParams::init(ModelSpec{32, 1, 30}, 11), TrainingStream::hard(repeat("AB.", 6001)),
                 cfg)
        .params;
  }();
  return teacher;
}

TEST(Smoke, CyclicTeacherPredictsBAfterA) {
  const SymbolSeq probe = repeat("AB.", 30);
  const ScoredSequence scored = score_sequence(ab_teacher(), probe, ModelState::zeros(ab_teacher().spec));
  // Every A after the first full cycle.
  for (std::size_t t = 3; t + 1 < probe.size(); ++t) {
    if (probe[t] == encode_canonical("A")[0]) {
      EXPECT_GT(scored.labels[t][static_cast<std::size_t>(encode_canonical("B")[0])], 0.99) << "position " << t;
    }
  }
}

TEST(Smoke, TwoWindowsOverAbabLoseLossWithin50Updates) {
  const TrainingStream data = TrainingStream::hard(repeat("AB", 33));
  const ModelSpec spec{8, 1, 30};
  ModelParams params = ModelParams::init(spec, 3);
  const TrainConfig cfg = small_config(1, 16, 50);
  OptimizerState opt = OptimizerState::zeros(params.size());
  auto two_window_loss = [&](const ModelParams& p) {
    ModelState s = ModelState::zeros(spec);
    double total = 0.0;
    for (std::size_t start : {0u, 16u}) {
      ModelParams g = ModelParams::zeros(spec);
      total += window_gradient(p, WindowBatch{&data, {start}, 16}, s, g).loss;
    }
    return total;
  };
  const double before = two_window_loss(params);
  double last = before;
  std::size_t decreases = 0;
  for (std::size_t u = 0; u < 50; ++u) {
    ModelState carried = ModelState::zeros(spec);
    bptt_update(params, opt, WindowBatch{&data, {0}, 16}, carried, cfg);
    bptt_update(params, opt, WindowBatch{&data, {16}, 16}, carried, cfg);
    const double now = two_window_loss(params);
    if (now < last) ++decreases;
    last = now;
  }
  EXPECT_LT(last, before);
  EXPECT_GT(decreases, 25u);
}

TEST(Smoke, AdadeltaStepApproachesGradientFixedPoint) {
  // For a constant gradient g the accumulators converge to g^2, so the
  // Adadelta step tends to -g.
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.lr = 1.0;
  const double g = 1e-3;
  OptimizerState opt = OptimizerState::zeros(1);
  double eg2 = 0.0;
  double edx2 = 0.0;
  double step = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> grads = {g};
    step = adadelta_nesterov_step(grads, opt, cfg)[0];
    eg2 = cfg.adadelta_rho * eg2 + (1 - cfg.adadelta_rho) * g * g;
    const double d = -std::sqrt(edx2 + cfg.adadelta_eps) / std::sqrt(eg2 + cfg.adadelta_eps) * g;
    edx2 = cfg.adadelta_rho * edx2 + (1 - cfg.adadelta_rho) * d * d;
    ASSERT_DOUBLE_EQ(step, d) << "step " << i;
  }
  EXPECT_NEAR(step, -g, 1e-9);
}

TEST(Smoke, UnusedRecurrentWeightsHaveZeroGradient) {
  // One step from a zero state: recurrent weights never touch the loss.
  const ModelSpec spec{1, 1, 30};
  const ModelParams params = testing::random_model(spec, 5);
  const TrainingStream data = TrainingStream::hard(testing::random_sequence(6, 2));
  const ModelState zero = ModelState::zeros(spec);
  ModelState s = zero;
  ModelParams grads = ModelParams::zeros(spec);
  window_gradient(params, WindowBatch{&data, {0}, 1}, s, grads);
  const auto fd = testing::extended_fd_gradient(params, data, {0}, 1, zero, 1e-5);
  const auto an = grads.flatten();
  const std::size_t rec_begin = 4 * 30;
  for (std::size_t k = rec_begin; k < rec_begin + 4; ++k) {
    EXPECT_EQ(an[k], 0.0);
    EXPECT_LT(relative_error(an[k], fd[k]), 1e-4);
  }
  for (std::size_t k = 0; k < an.size(); ++k) EXPECT_LT(relative_error(an[k], fd[k]), 1e-4) << k;
}

TEST(Smoke, WideCellLearnsCycleBelowTenthOfABit) {
  const SymbolSeq text = repeat("AB.", 3001);
  const SymbolSeq valid = repeat("AB.", 300);
  Trainer trainer(ModelParams::init(ModelSpec{256, 1, 30}, 17), small_config(4, 16, 50));
  double best = bpc(trainer.params(), valid);
  const TrainingStream data = TrainingStream::hard(text);
  while (trainer.updates() < 2000 && best >= 0.1) {
    trainer.config().max_updates = 50;
    trainer.fit(data);
    best = bpc(trainer.params(), valid);
  }
  EXPECT_LT(best, 0.1) << "after " << trainer.updates() << " updates";
  EXPECT_LE(trainer.updates(), 2000u);
}

TEST(Smoke, TeacherDrivenTransferOfTheCycle) {
  const SymbolSeq test = repeat("AB.", 600);
  GktConfig cfg;
  cfg.mode = TransferMode::kTeacherDriven;
  cfg.budget_chars = 10000;
  cfg.lot_chars = 10000;
  cfg.generation_streams = 8;
  cfg.train = small_config(4, 24, 300);
  cfg.seed = 3;
  const TransferResult r = run_tdgkt(ab_teacher(), ModelParams::init(ModelSpec{32, 1, 30}, 23), cfg, {});
  EXPECT_LT(bpc(r.student, test), bpc(ab_teacher(), test) + 0.05);
}

TEST(Smoke, SoftTargetsCloseTheGapToTheTeacher) {
  testing::SyntheticOptions o;
  o.target_chars = 80000;
  o.seed = 41;
  const SymbolSeq corpus = preprocess(testing::synthetic_corpus(o));
  const SymbolSeq held(corpus.end() - 4000, corpus.end());
  const SymbolSeq train_part(corpus.begin(), corpus.end() - 4000);
  const ModelParams teacher =
      train(ModelParams::init(ModelSpec{32, 1, 30}, 2), TrainingStream::hard(train_part), small_config(8, 32, 400))
          .params;
  const double teacher_bpc = bpc(teacher, held);
  SampleOptions opts;
  opts.max_sentence = 500;
  const SampledText gen = sample_sequence(teacher, 40000, 9, opts);
  std::vector<double> gaps;
  TrainConfig cfg = small_config(8, 32, 400);
  cfg.eval_every = 50;
  train(ModelParams::init(ModelSpec{16, 1, 30}, 4), TrainingStream::from_generated(gen.ids, gen.labels), cfg,
        [&](const ModelParams& p, std::uint64_t) {
          const double b = bpc(p, held);
          gaps.push_back(b - teacher_bpc);
          return b;
        });
  ASSERT_GE(gaps.size(), 8u);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < gaps.size(); ++i) rises += gaps[i] >= gaps[i - 1] ? 1 : 0;
  EXPECT_LE(rises, 1u);
  EXPECT_LT(gaps.back(), gaps.front());
}

TEST(Smoke, TeacherPrefersAKnownWordOverItsAnagram) {
  testing::SyntheticOptions o;
  o.target_chars = 120000;
  o.private_fraction = 0.5;
  o.seed = 77;
  const SymbolSeq corpus = preprocess(testing::synthetic_corpus(o));
  ASSERT_GT(count_word(corpus, "JANUARY"), 10u);
  const ModelParams teacher =
      train(ModelParams::init(ModelSpec{48, 1, 30}, 8), TrainingStream::hard(corpus), small_config(8, 48, 600))
          .params;
  OovProbeSpec probe;
  probe.words = {"JANUARY", "RAUNJAY"};
  probe.contexts = {encode_canonical("IN "), encode_canonical("SINCE "), encode_canonical("SALES ROSE IN ")};
  probe.sample_chars = 0;
  const auto scores = oov_probe(teacher, probe);
  EXPECT_GT(scores[0].mean_log2, scores[1].mean_log2);
}

}  // namespace
}  // namespace gkt
