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

#ifndef GKT_WIRE_HPP
#define GKT_WIRE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gkt/clm.hpp"

namespace gkt {

// Frame: "GKTW" | version u16 | type u8 | round u32 | lot u32 | sender u32 |
// payload_len u64 | payload. All integers little-endian.
inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 4 + 2 + 1 + 4 + 4 + 4 + 8;

inline constexpr std::uint32_t kServerId = 0xFFFFFFFEu;
inline constexpr std::uint32_t kAggregatorId = 0xFFFFFFFDu;

enum class MessageType : std::uint8_t {
  kTextLot = 1,
  kSoftLabelLot = 2,
  kAggregatedLabels = 3,
};

std::string to_string(MessageType t);

// Payload: one byte per symbol id.
struct TextLot {
  std::uint32_t round = 0;
  std::uint32_t lot = 0;
  std::uint32_t sender = kServerId;
  SymbolSeq text;
};

// Payload: 30 f32 per position, in generated-text alignment.
struct SoftLabelLot {
  std::uint32_t round = 0;
  std::uint32_t lot = 0;
  std::uint32_t sender = 0;
  SoftLabelSeq labels;
};

// Payload: device count u32, then 30 f32 per position.
struct AggregatedLabels {
  std::uint32_t round = 0;
  std::uint32_t lot = 0;
  std::uint32_t device_count = 0;
  SoftLabelSeq labels;
};

using Message = std::variant<TextLot, SoftLabelLot, AggregatedLabels>;

MessageType type_of(const Message& m);
std::uint32_t round_of(const Message& m);
std::uint32_t sender_of(const Message& m);

std::vector<std::uint8_t> encode_frame(const Message& m);

/// Decodes one frame from the front of `bytes`; `consumed` receives its
/// length. Labels are widened to double and renormalized so each position
/// sums to 1. Throws DataError on malformed input.
Message decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

std::vector<Message> decode_frames(std::span<const std::uint8_t> bytes);

// Frame round trip: what a receiver sees after the f32 wire encoding.
Message wire_round_trip(const Message& m);

// One JSON object per line: header fields, payload length, and a short preview.
std::string to_json_line(const Message& m);

/// Soft-label file: a sequence of SoftLabelLot frames (lot = chunk index)
/// whose concatenation is the label stream.
void write_label_file(const std::string& path, const SoftLabelSeq& labels,
                      std::size_t chunk = 65536);
SoftLabelSeq read_label_file(const std::string& path);

/// Blocking frame transport over a connected TCP socket.
class FrameSocket {
 public:
  explicit FrameSocket(int fd) : fd_(fd) {}
  FrameSocket(const FrameSocket&) = delete;
  FrameSocket& operator=(const FrameSocket&) = delete;
  FrameSocket(FrameSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  FrameSocket& operator=(FrameSocket&& other) noexcept;
  ~FrameSocket();

  static FrameSocket connect_loopback(std::uint16_t port);

  void send(const Message& m);
  Message receive();
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
};

/// Listening loopback socket on an ephemeral port.
class FrameListener {
 public:
  FrameListener();
  FrameListener(const FrameListener&) = delete;
  FrameListener& operator=(const FrameListener&) = delete;
  ~FrameListener();

  std::uint16_t port() const { return port_; }
  FrameSocket accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace gkt

#endif  // GKT_WIRE_HPP
