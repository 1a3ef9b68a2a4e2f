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

#include "gkt/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "gkt/bytes.hpp"
#include "gkt/errors.hpp"

namespace gkt {

namespace {

constexpr char kMagic[4] = {'G', 'K', 'T', 'W'};

struct Header {
  MessageType type;
  std::uint32_t round;
  std::uint32_t lot;
  std::uint32_t sender;
};

Header header_of(const Message& m) {
  return std::visit(
      [](const auto& v) -> Header {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextLot>) {
          return {MessageType::kTextLot, v.round, v.lot, v.sender};
        } else if constexpr (std::is_same_v<T, SoftLabelLot>) {
          return {MessageType::kSoftLabelLot, v.round, v.lot, v.sender};
        } else {
          return {MessageType::kAggregatedLabels, v.round, v.lot, kAggregatorId};
        }
      },
      m);
}

void put_labels(ByteWriter& w, const SoftLabelSeq& labels) {
  for (const auto& d : labels) {
    for (double x : d.p) w.f32(static_cast<float>(x));
  }
}

SoftLabelSeq get_labels(ByteReader& r, std::size_t bytes) {
  const std::size_t per = static_cast<std::size_t>(kVocabSize) * 4;
  if (bytes % per != 0) throw DataError("wire: label payload is not a multiple of 30 f32");
  SoftLabelSeq out(bytes / per);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double total = 0.0;
    for (int k = 0; k < kVocabSize; ++k) {
      const double x = static_cast<double>(r.f32());
      if (!std::isfinite(x) || x < 0.0) {
        throw DataError("wire: invalid probability at position " + std::to_string(t));
      }
      out[t].p[k] = x;
      total += x;
    }
    if (!(total > 0.0)) throw DataError("wire: zero distribution at position " + std::to_string(t));
    for (double& x : out[t].p) x /= total;
  }
  return out;
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw DataError(std::string("socket send failed: ") + std::strerror(errno));
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::recv(fd, data, n, 0);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw DataError(std::string("socket receive failed: ") + std::strerror(errno));
    }
    if (k == 0) throw DataError("socket closed mid-frame");
    data += k;
    n -= static_cast<std::size_t>(k);
  }
}

}  // namespace

std::string to_string(MessageType t) {
  switch (t) {
    case MessageType::kTextLot:
      return "text_lot";
    case MessageType::kSoftLabelLot:
      return "soft_label_lot";
    case MessageType::kAggregatedLabels:
      return "aggregated_labels";
  }
  return "unknown";
}

MessageType type_of(const Message& m) { return header_of(m).type; }
std::uint32_t round_of(const Message& m) { return header_of(m).round; }
std::uint32_t sender_of(const Message& m) { return header_of(m).sender; }

std::vector<std::uint8_t> encode_frame(const Message& m) {
  ByteWriter payload;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextLot>) {
          payload.bytes(std::span<const std::uint8_t>(v.text));
        } else if constexpr (std::is_same_v<T, SoftLabelLot>) {
          put_labels(payload, v.labels);
        } else {
          payload.u32(v.device_count);
          put_labels(payload, v.labels);
        }
      },
      m);
  const Header h = header_of(m);
  ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kWireVersion);
  w.u8(static_cast<std::uint8_t>(h.type));
  w.u32(h.round);
  w.u32(h.lot);
  w.u32(h.sender);
  w.u64(payload.data().size());
  w.bytes(std::span<const std::uint8_t>(payload.data()));
  return w.take();
}

Message decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  ByteReader r(bytes, "wire frame");
  auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError("wire: bad magic");
  const std::uint16_t version = r.u16();
  if (version != kWireVersion) {
    throw DataError("wire: unsupported version " + std::to_string(version));
  }
  const std::uint8_t type = r.u8();
  const std::uint32_t round = r.u32();
  const std::uint32_t lot = r.u32();
  const std::uint32_t sender = r.u32();
  const std::uint64_t len = r.u64();
  if (len > r.remaining()) throw DataError("wire: payload length exceeds frame");
  ByteReader p(r.bytes(static_cast<std::size_t>(len)), "wire payload");
  Message out;
  switch (static_cast<MessageType>(type)) {
    case MessageType::kTextLot: {
      TextLot m{round, lot, sender, {}};
      auto ids = p.bytes(static_cast<std::size_t>(len));
      m.text.assign(ids.begin(), ids.end());
      for (std::size_t t = 0; t < m.text.size(); ++t) {
        if (m.text[t] >= kVocabSize) {
          throw DataError("wire: symbol id out of range at position " + std::to_string(t));
        }
      }
      out = std::move(m);
      break;
    }
    case MessageType::kSoftLabelLot:
      out = SoftLabelLot{round, lot, sender, get_labels(p, static_cast<std::size_t>(len))};
      break;
    case MessageType::kAggregatedLabels: {
      AggregatedLabels m{round, lot, p.u32(), {}};
      if (sender != kAggregatorId) throw DataError("wire: aggregated labels not from aggregator");
      m.labels = get_labels(p, p.remaining());
      out = std::move(m);
      break;
    }
    default:
      throw DataError("wire: unknown message type " + std::to_string(type));
  }
  if (consumed != nullptr) *consumed = r.position();
  return out;
}

std::vector<Message> decode_frames(std::span<const std::uint8_t> bytes) {
  std::vector<Message> out;
  while (!bytes.empty()) {
    std::size_t used = 0;
    out.push_back(decode_frame(bytes, &used));
    bytes = bytes.subspan(used);
  }
  return out;
}

Message wire_round_trip(const Message& m) {
  const auto bytes = encode_frame(m);
  return decode_frame(bytes);
}

std::string to_json_line(const Message& m) {
  const Header h = header_of(m);
  nlohmann::json j;
  j["type"] = to_string(h.type);
  j["round"] = h.round;
  j["lot"] = h.lot;
  j["sender"] = h.sender;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextLot>) {
          j["positions"] = v.text.size();
          j["preview"] = decode(SymbolSeq(v.text.begin(),
                                          v.text.begin() + std::min<std::size_t>(v.text.size(), 80)));
        } else {
          j["positions"] = v.labels.size();
          if constexpr (std::is_same_v<T, AggregatedLabels>) j["device_count"] = v.device_count;
          if (!v.labels.empty()) {
            j["first"] = std::vector<double>(v.labels.front().p.begin(), v.labels.front().p.end());
          }
        }
      },
      m);
  return j.dump();
}

void write_label_file(const std::string& path, const SoftLabelSeq& labels, std::size_t chunk) {
  if (chunk == 0) throw ConfigError("label chunk must be positive");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  std::uint32_t lot = 0;
  for (std::size_t start = 0; start < labels.size() || (labels.empty() && lot == 0); start += chunk) {
    SoftLabelLot m;
    m.lot = lot++;
    m.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(start),
                    labels.begin() + static_cast<std::ptrdiff_t>(std::min(labels.size(), start + chunk)));
    const auto bytes = encode_frame(m);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (labels.empty()) break;
  }
  if (!out) throw DataError("write failed: " + path);
}

SoftLabelSeq read_label_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SoftLabelSeq out;
  std::uint32_t expect = 0;
  for (auto& m : decode_frames(bytes)) {
    auto* lot = std::get_if<SoftLabelLot>(&m);
    if (lot == nullptr) throw DataError(path + ": unexpected frame type in label file");
    if (lot->lot != expect++) throw DataError(path + ": label chunks out of order");
    out.insert(out.end(), lot->labels.begin(), lot->labels.end());
  }
  return out;
}

FrameSocket& FrameSocket::operator=(FrameSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

FrameSocket::~FrameSocket() {
  if (fd_ >= 0) ::close(fd_);
}

FrameSocket FrameSocket::connect_loopback(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw DataError(std::string("socket: ") + std::strerror(errno));
  FrameSocket s(fd);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw DataError(std::string("connect: ") + std::strerror(errno));
  }
  return s;
}

void FrameSocket::send(const Message& m) {
  const auto bytes = encode_frame(m);
  write_all(fd_, bytes.data(), bytes.size());
}

Message FrameSocket::receive() {
  std::vector<std::uint8_t> buf(kFrameHeaderSize);
  read_all(fd_, buf.data(), buf.size());
  ByteReader r(buf, "wire header");
  r.bytes(4 + 2 + 1 + 4 + 4 + 4);
  const std::uint64_t len = r.u64();
  if (len > (std::uint64_t{1} << 34)) throw DataError("wire: implausible payload length");
  buf.resize(kFrameHeaderSize + static_cast<std::size_t>(len));
  read_all(fd_, buf.data() + kFrameHeaderSize, static_cast<std::size_t>(len));
  return decode_frame(buf);
}

FrameListener::FrameListener() {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw DataError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = 0;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 16) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw DataError("listen: " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

FrameListener::~FrameListener() {
  if (fd_ >= 0) ::close(fd_);
}

FrameSocket FrameListener::accept() {
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw DataError(std::string("accept: ") + std::strerror(errno));
  return FrameSocket(fd);
}

}  // namespace gkt
