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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "gkt/checkpoint.hpp"
#include "gkt/errors.hpp"
#include "oracle.hpp"

namespace gkt {
namespace {

Checkpoint sample_checkpoint(bool with_optimizer) {
  Checkpoint c;
  c.params = testing::random_model(ModelSpec{5, 2, 30}, 3);
  c.params.w_out(0, 0) = -0.0;
  c.params.b_out(1) = 1e-310;  // subnormal survives
  c.frames_trained = 123456;
  c.updates = 789;
  c.seed_lineage = {1, 2, 0xFFFFFFFFFFFFFFFFULL};
  if (with_optimizer) {
    OptimizerState o = OptimizerState::zeros(c.params.size());
    for (std::size_t k = 0; k < o.size(); ++k) {
      o.eg2[k] = 0.001 * k;
      o.edx2[k] = 1e-7 * k;
      o.velocity[k] = -0.5 * k;
    }
    o.steps = 789;
    c.optimizer = o;
  }
  return c;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  for (bool opt : {false, true}) {
    const Checkpoint c = sample_checkpoint(opt);
    const auto bytes = encode_checkpoint(c);
    const Checkpoint d = decode_checkpoint(bytes, "mem");
    EXPECT_TRUE(d.params.spec == c.params.spec);
    EXPECT_TRUE(bit_equal(d.params.flatten(), c.params.flatten()));
    EXPECT_EQ(d.frames_trained, c.frames_trained);
    EXPECT_EQ(d.updates, c.updates);
    EXPECT_EQ(d.seed_lineage, c.seed_lineage);
    ASSERT_EQ(d.optimizer.has_value(), opt);
    if (opt) {
      EXPECT_TRUE(bit_equal(d.optimizer->eg2, c.optimizer->eg2));
      EXPECT_TRUE(bit_equal(d.optimizer->velocity, c.optimizer->velocity));
      EXPECT_EQ(d.optimizer->steps, 789u);
    }
    EXPECT_EQ(encode_checkpoint(d), bytes);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "gkt_ckpt_test.bin").string();
  const Checkpoint c = sample_checkpoint(true);
  save_checkpoint(path, c);
  const Checkpoint d = load_checkpoint(path);
  EXPECT_EQ(encode_checkpoint(d), encode_checkpoint(c));
  const ModelSpec wrong{6, 2, 30};
  EXPECT_THROW(load_checkpoint(path, &wrong), DimensionError);
  EXPECT_THROW(load_checkpoint(path + ".missing"), DataError);
}

TEST(Checkpoint, RejectsCorruption) {
  const auto bytes = encode_checkpoint(sample_checkpoint(false));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic, "m"), DataError);

  auto bad_version = bytes;
  bad_version[5] = 99;
  EXPECT_THROW(decode_checkpoint(bad_version, "m"), DataError);

  auto bad_vocab = bytes;
  bad_vocab[19] ^= 0x5a;
  try {
    decode_checkpoint(bad_vocab, "m");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("vocab"), std::string::npos) << e.what();
  }

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(truncated, "m"), DataError);

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_checkpoint(trailing, "m"), DataError);
}

}  // namespace
}  // namespace gkt
