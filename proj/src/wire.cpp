// Copyright 2026 The CodedReduce Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codedreduce/wire.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cerrno>
#include <cstring>
#include <string>

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace codedreduce::wire {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

namespace {

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>(bits & 0xff));
    bits = static_cast<U>(bits >> 8);
  }
}

template <typename T>
T get_le(std::span<const std::byte> bytes, std::size_t at) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<T>(bytes[at + i]) << (8 * i));
  return value;
}

}  // namespace

std::vector<std::byte> encode(const Message& msg) {
  if (msg.payload.size() > kMaxPayload) throw ProtocolError("payload too large");
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + 8 * msg.payload.size());
  for (std::byte b : kMagic) out.push_back(b);
  out.push_back(static_cast<std::byte>(msg.type));
  put_le<std::uint16_t>(out, msg.sender_layer);
  put_le<std::uint32_t>(out, msg.sender_index);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(msg.payload.size()));
  for (double v : msg.payload) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Header decode_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderSize) throw ProtocolError("truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw ProtocolError("bad magic");
  const auto type = static_cast<std::uint8_t>(bytes[4]);
  if (type > static_cast<std::uint8_t>(MessageType::kShutdown))
    throw ProtocolError("unknown message type " + std::to_string(type));
  Header h{static_cast<MessageType>(type), get_le<std::uint16_t>(bytes, 5),
           get_le<std::uint32_t>(bytes, 7), get_le<std::uint32_t>(bytes, 11)};
  if (h.payload_len > kMaxPayload) throw ProtocolError("payload length too large");
  return h;
}

Message decode(std::span<const std::byte> bytes) {
  const Header h = decode_header(bytes);
  if (bytes.size() != kHeaderSize + 8 * static_cast<std::size_t>(h.payload_len))
    throw ProtocolError("frame length does not match payload_len");
  Message msg{h.type, h.sender_layer, h.sender_index, {}};
  msg.payload.reserve(h.payload_len);
  for (std::uint32_t i = 0; i < h.payload_len; ++i)
    msg.payload.push_back(std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderSize + 8 * i)));
  return msg;
}

void send_message(int fd, const Message& msg) {
  const auto bytes = encode(msg);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PeerClosed(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

namespace {

// Returns false on EOF before the first byte.
bool read_exact(int fd, std::byte* buf, std::size_t len, Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < len) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw Timeout("receive timed out");
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw PeerClosed(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    const ssize_t n = ::recv(fd, buf + got, len - got, 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw PeerClosed(std::string("recv failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (got == 0) return false;
      throw ProtocolError("connection closed mid-frame");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

Message receive_message(int fd, Clock::time_point deadline) {
  std::vector<std::byte> frame(kHeaderSize);
  if (!read_exact(fd, frame.data(), kHeaderSize, deadline)) throw PeerClosed("peer closed");
  const Header h = decode_header(frame);
  frame.resize(kHeaderSize + 8 * static_cast<std::size_t>(h.payload_len));
  if (h.payload_len > 0 &&
      !read_exact(fd, frame.data() + kHeaderSize, frame.size() - kHeaderSize, deadline))
    throw ProtocolError("connection closed mid-frame");
  return decode(frame);
}

}  // namespace codedreduce::wire
