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

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace codedreduce::wire {

// Frame layout, all integers little-endian:
//   magic "CRD1" | type u8 | sender_layer u16 | sender_index u32 |
//   payload_len u32 | payload_len x f64 (IEEE-754, little-endian)
inline constexpr std::array<std::byte, 4> kMagic{std::byte{'C'}, std::byte{'R'}, std::byte{'D'},
                                                 std::byte{'1'}};
inline constexpr std::size_t kHeaderSize = 15;
inline constexpr std::uint32_t kMaxPayload = 1u << 24;

enum class MessageType : std::uint8_t { kModel = 0, kGradient = 1, kShutdown = 2 };

struct Message {
  MessageType type = MessageType::kShutdown;
  std::uint16_t sender_layer = 0;
  std::uint32_t sender_index = 0;
  std::vector<double> payload;

  friend bool operator==(const Message&, const Message&) = default;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::byte> encode(const Message& msg);

/// Parses the fixed header; returns the payload length it announces.
struct Header {
  MessageType type;
  std::uint16_t sender_layer;
  std::uint32_t sender_index;
  std::uint32_t payload_len;
};
Header decode_header(std::span<const std::byte> bytes);

/// Decodes one complete frame; throws ProtocolError on a bad magic, unknown
/// type, or a length that does not match the buffer.
Message decode(std::span<const std::byte> bytes);

/// Blocking socket helpers. `deadline` bounds the whole operation.
using Clock = std::chrono::steady_clock;

class Timeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PeerClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void send_message(int fd, const Message& msg);
/// Reads exactly one frame. Throws PeerClosed on a clean EOF before any byte,
/// Timeout past the deadline, ProtocolError on malformed input.
Message receive_message(int fd, Clock::time_point deadline);

}  // namespace codedreduce::wire
