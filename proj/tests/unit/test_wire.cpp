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

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

#include "gkt/errors.hpp"
#include "gkt/rng.hpp"
#include "gkt/wire.hpp"

namespace gkt {
namespace {

SoftLabelSeq random_labels(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  SoftLabelSeq out(n);
  for (auto& d : out) {
    double total = 0.0;
    for (double& x : d.p) {
      x = rng.uniform() < 0.3 ? 0.0 : -std::log(1.0 - rng.uniform());
      total += x;
    }
    if (total == 0.0) {
      d = Distribution::uniform();
      continue;
    }
    for (double& x : d.p) x /= total;
  }
  return out;
}

const SymbolSeq& testing_text() {
  static const SymbolSeq s = encode_canonical("PROFIT ROSE IN THE QUARTER\nSALES FELL.\n");
  return s;
}

TEST(Wire, HeaderLayoutIsFixed) {
  const TextLot m{3, 4, 5, encode_canonical("AB\n")};
  const auto bytes = encode_frame(m);
  ASSERT_EQ(bytes.size(), kFrameHeaderSize + 3);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GKTW");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 1);  // text lot
  EXPECT_EQ(bytes[7], 3);  // round
  EXPECT_EQ(bytes[11], 4);  // lot
  EXPECT_EQ(bytes[15], 5);  // sender
  EXPECT_EQ(bytes[19], 3);  // payload length
  EXPECT_EQ(bytes[27], 0);  // 'A'
  EXPECT_EQ(bytes[29], Vocab::kEos);
}

TEST(Wire, TextRoundTripIsExact) {
  const TextLot m{1, 0, kServerId, testing_text()};
  const auto back = std::get<TextLot>(decode_frame(encode_frame(m)));
  EXPECT_EQ(back.text, m.text);
  EXPECT_EQ(back.sender, kServerId);
  EXPECT_EQ(back.round, 1u);
}

TEST(Wire, LabelRoundTripWithinQuantization) {
  const SoftLabelLot m{2, 7, 4, random_labels(1, 500)};
  const auto bytes = encode_frame(m);
  EXPECT_EQ(bytes.size(), kFrameHeaderSize + 500 * 30 * 4);
  const auto back = std::get<SoftLabelLot>(decode_frame(bytes));
  ASSERT_EQ(back.labels.size(), 500u);
  EXPECT_EQ(back.sender, 4u);
  for (std::size_t t = 0; t < 500; ++t) {
    EXPECT_TRUE(back.labels[t].valid(1e-12));
    for (int k = 0; k < kVocabSize; ++k) {
      ASSERT_LE(std::abs(back.labels[t][k] - m.labels[t][k]), 1e-7);
      if (m.labels[t][k] == 0.0) ASSERT_EQ(back.labels[t][k], 0.0);
    }
  }
}

TEST(Wire, AggregatedCarriesDeviceCount) {
  const AggregatedLabels m{9, 0, 10, random_labels(2, 20)};
  const auto back = std::get<AggregatedLabels>(decode_frame(encode_frame(m)));
  EXPECT_EQ(back.device_count, 10u);
  EXPECT_EQ(back.labels.size(), 20u);
  EXPECT_EQ(sender_of(back), kAggregatorId);
}

TEST(Wire, StreamOfFramesDecodesInOrder) {
  std::vector<std::uint8_t> all;
  for (std::uint32_t k = 0; k < 3; ++k) {
    const auto b = encode_frame(TextLot{k, k, 0, SymbolSeq(k + 1, 2)});
    all.insert(all.end(), b.begin(), b.end());
  }
  const auto msgs = decode_frames(all);
  ASSERT_EQ(msgs.size(), 3u);
  for (std::uint32_t k = 0; k < 3; ++k) EXPECT_EQ(round_of(msgs[k]), k);
}

TEST(Wire, MalformedFramesAreRejected) {
  const auto good = encode_frame(SoftLabelLot{1, 0, 0, random_labels(3, 2)});
  auto bad = good;
  bad[1] = 'X';
  EXPECT_THROW(decode_frame(bad), DataError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_frame(bad), DataError);
  bad = good;
  bad[6] = 9;
  EXPECT_THROW(decode_frame(bad), DataError);
  bad = good;
  bad.resize(good.size() - 1);
  EXPECT_THROW(decode_frame(bad), DataError);
  bad = good;
  bad[19] = 7;  // payload length not a multiple of 120
  bad.resize(kFrameHeaderSize + 7);
  EXPECT_THROW(decode_frame(bad), DataError);
  auto text = encode_frame(TextLot{0, 0, 0, SymbolSeq{1, 2}});
  text.back() = 31;
  EXPECT_THROW(decode_frame(text), DataError);
}

TEST(Wire, NegativeProbabilityIsRejected) {
  auto bytes = encode_frame(SoftLabelLot{1, 0, 0, SoftLabelSeq{Distribution::uniform()}});
  bytes[kFrameHeaderSize + 3] |= 0x80;  // sign bit of the first f32
  EXPECT_THROW(decode_frame(bytes), DataError);
}

TEST(Wire, LabelFileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "gkt_labels.bin").string();
  const SoftLabelSeq labels = random_labels(4, 1000);
  write_label_file(path, labels, 300);
  const SoftLabelSeq back = read_label_file(path);
  ASSERT_EQ(back.size(), labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    for (int k = 0; k < kVocabSize; ++k) ASSERT_LE(std::abs(back[t][k] - labels[t][k]), 1e-7);
  }
}

TEST(Wire, JsonMirrorParses) {
  const auto line = to_json_line(AggregatedLabels{2, 1, 3, random_labels(5, 4)});
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j.at("type"), "aggregated_labels");
  EXPECT_EQ(j.at("round"), 2);
  EXPECT_EQ(j.at("device_count"), 3);
  EXPECT_EQ(j.at("positions"), 4);
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Wire, LoopbackSocketCarriesFrames) {
  FrameListener listener;
  const SoftLabelLot sent{4, 2, 1, random_labels(6, 3000)};
  std::thread client([&] {
    FrameSocket s = FrameSocket::connect_loopback(listener.port());
    s.send(TextLot{4, 2, kServerId, testing_text()});
    s.send(sent);
  });
  FrameSocket server = listener.accept();
  const Message a = server.receive();
  const Message b = server.receive();
  client.join();
  EXPECT_EQ(std::get<TextLot>(a).text, testing_text());
  EXPECT_EQ(encode_frame(b), encode_frame(wire_round_trip(sent)));
}

}  // namespace
}  // namespace gkt
