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

// Published constants: alphabet, split ratios, word groups, lot and cycle arithmetic.

#include <gtest/gtest.h>

#include <cmath>

#include "gkt/clm.hpp"
#include "gkt/corpus.hpp"
#include "gkt/trainer.hpp"
#include "gkt/transfer.hpp"

namespace gkt {
namespace {

TEST(ReferenceValues, AlphabetIsLettersPlusFourSymbols) {
  EXPECT_EQ(kVocabSize, 30);
  EXPECT_EQ(Vocab::kSymbols.substr(0, 26), "ABCDEFGHIJKLMNOPQRSTUVWXYZ");
  EXPECT_EQ(Vocab::kSymbols.substr(26), " \n'.");
}

TEST(ReferenceValues, DefaultSplitIs98To1To1) {
  const Fractions f;
  EXPECT_DOUBLE_EQ(f.train, 0.98);
  EXPECT_DOUBLE_EQ(f.valid, 0.01);
  EXPECT_DOUBLE_EQ(f.test, 0.01);
}

TEST(ReferenceValues, PrivateWordGroups) {
  const auto w = default_private_words();
  int months = 0, weekdays = 0, seasons = 0;
  for (const char* m : {"JANUARY", "FEBRUARY", "MARCH", "APRIL", "MAY", "JUNE", "JULY", "AUGUST",
                        "SEPTEMBER", "OCTOBER", "NOVEMBER", "DECEMBER"})
    months += static_cast<int>(w.count(m));
  for (const char* d : {"MONDAY", "TUESDAY", "WEDNESDAY", "THURSDAY", "FRIDAY", "SATURDAY", "SUNDAY"})
    weekdays += static_cast<int>(w.count(d));
  for (const char* s : {"SPRING", "SUMMER", "AUTUMN", "WINTER"}) seasons += static_cast<int>(w.count(s));
  EXPECT_EQ(months, 12);
  EXPECT_EQ(weekdays, 7);
  EXPECT_EQ(seasons, 4);
}

TEST(ReferenceValues, LotTimesCyclesIsGeneratedTotal) {
  GktConfig g;
  g.lot_chars = 5000000;
  g.cycles = 10;
  EXPECT_EQ(g.lot_chars * g.cycles, 50000000u);
}

TEST(ReferenceValues, UniformModelBpcIsLog2Of30) {
  const ModelParams p = ModelParams::zeros(ModelSpec{256, 2, 30});
  EXPECT_NEAR(bpc(p, encode_canonical("THE\n")), 4.906890595608519, 1e-12);
}

TEST(ReferenceValues, PresetSpecs) {
  for (const char* s : {"256x2", "512x2", "1024x4"}) {
    const ModelSpec spec = ModelSpec::parse(s);
    EXPECT_EQ(spec.to_string(), s);
  }
}

TEST(ReferenceValues, ForgetBiasAndInitScale) {
  const ModelParams p = ModelParams::init(ModelSpec{16, 1, 30}, 1);
  EXPECT_EQ(p.layers[0].bias_block(Gate::kForget)(0), 1.0);
  EXPECT_LE(p.layers[0].w_input.cwiseAbs().maxCoeff(), 0.08);
}

}  // namespace
}  // namespace gkt
