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

#include <benchmark/benchmark.h>

#include "gkt/clm.hpp"
#include "gkt/federation.hpp"
#include "gkt/numkernel.hpp"
#include "gkt/rng.hpp"
#include "gkt/trainer.hpp"
#include "gkt/wire.hpp"

namespace gkt {
namespace {

SymbolSeq random_text(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SymbolSeq s(n);
  for (auto& v : s) v = static_cast<SymbolId>(rng.below(kVocabSize));
  return s;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  Matrix a(n, n), b(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = rng.uniform(-1, 1);
    b.data()[i] = rng.uniform(-1, 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_Softmax(benchmark::State& state) {
  Rng rng(2);
  Matrix z(static_cast<Eigen::Index>(state.range(0)), kVocabSize);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.uniform(-5, 5);
  for (auto _ : state) {
    Matrix w = z;
    softmax_rows(w);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Softmax)->Arg(1)->Arg(32);

// One update (forward + BPTT + optimizer) over batch x window frames.
void BM_BpttUpdate(benchmark::State& state) {
  const ModelSpec spec{static_cast<int>(state.range(0)), 2, kVocabSize};
  const std::size_t batch = 32, window = 64;
  ModelParams params = ModelParams::init(spec, 3);
  const TrainingStream data = TrainingStream::hard(random_text(batch * window + 1, 4));
  WindowBatch wb{&data, {}, window};
  for (std::size_t b = 0; b < batch; ++b) wb.starts.push_back(b * window);
  TrainConfig cfg;
  OptimizerState opt = OptimizerState::zeros(params.size());
  for (auto _ : state) {
    ModelState carried = ModelState::zeros(spec, static_cast<int>(batch));
    benchmark::DoNotOptimize(bptt_update(params, opt, wb, carried, cfg).loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch * window));
  state.SetLabel("frames");
}
BENCHMARK(BM_BpttUpdate)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_StreamingBpc(benchmark::State& state) {
  const ModelParams params = ModelParams::init(ModelSpec{static_cast<int>(state.range(0)), 2, kVocabSize}, 5);
  const SymbolSeq text = random_text(4096, 6);
  for (auto _ : state) benchmark::DoNotOptimize(bpc(params, text));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_StreamingBpc)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TeacherLabels(benchmark::State& state) {
  const ModelParams params = ModelParams::init(ModelSpec{128, 2, kVocabSize}, 7);
  const SymbolSeq text = random_text(4096, 8);
  for (auto _ : state) benchmark::DoNotOptimize(teacher_labels(params, text).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_TeacherLabels)->Unit(benchmark::kMillisecond);

void BM_SampleStreams(benchmark::State& state) {
  const ModelParams params = ModelParams::init(ModelSpec{64, 2, kVocabSize}, 9);
  const auto streams = static_cast<std::size_t>(state.range(0));
  const std::size_t per_stream = 8192 / streams;
  for (auto _ : state) benchmark::DoNotOptimize(sample_streams(params, streams, per_stream, 10).ids.size());
  state.SetItemsProcessed(state.iterations() * 8192);
}
BENCHMARK(BM_SampleStreams)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_WireLabelRoundTrip(benchmark::State& state) {
  SoftLabelLot lot;
  lot.labels.assign(static_cast<std::size_t>(state.range(0)), Distribution::uniform());
  for (auto _ : state) benchmark::DoNotOptimize(wire_round_trip(Message{lot}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WireLabelRoundTrip)->Arg(20000);

void BM_Aggregate(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<SoftLabelSeq> lots(n, SoftLabelSeq(20000, Distribution::uniform()));
  std::vector<const SoftLabelSeq*> ptrs;
  for (const auto& l : lots) ptrs.push_back(&l);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(ptrs).size());
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_Aggregate)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gkt

BENCHMARK_MAIN();
