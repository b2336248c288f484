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

#include <random>
#include <thread>

#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

namespace codedreduce::wire {
namespace {

TEST(Wire, HeaderLayoutIsLittleEndian) {
  const Message msg{MessageType::kGradient, 0x0102, 0x03040506, {1.0}};
  const auto bytes = encode(msg);
  ASSERT_EQ(bytes.size(), kHeaderSize + 8);
  const std::vector<int> expected{'C', 'R', 'D', '1', 1, 0x02, 0x01, 0x06, 0x05, 0x04, 0x03, 1, 0, 0, 0,
                                  0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  for (std::size_t k = 0; k < expected.size(); ++k)
    EXPECT_EQ(static_cast<int>(bytes[k]), expected[k]) << "byte " << k;
}

TEST(Wire, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    Message msg;
    msg.type = static_cast<MessageType>(trial % 3);
    msg.sender_layer = static_cast<std::uint16_t>(rng());
    msg.sender_index = static_cast<std::uint32_t>(rng());
    msg.payload.resize(rng() % 64);
    for (auto& v : msg.payload) v = normal(rng);
    ASSERT_EQ(decode(encode(msg)), msg);
  }
}

TEST(Wire, SpecialValuesSurvive) {
  const Message msg{MessageType::kModel, 1, 2,
                    {0.0, -0.0, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::denorm_min(), -1e308}};
  const auto back = decode(encode(msg));
  EXPECT_EQ(back, msg);
  EXPECT_TRUE(std::signbit(back.payload[1]));
}

TEST(Wire, RejectsMalformedFrames) {
  auto bytes = encode({MessageType::kGradient, 1, 1, {1.0, 2.0}});
  auto bad_magic = bytes;
  bad_magic[0] = std::byte{'X'};
  EXPECT_THROW(decode(bad_magic), ProtocolError);
  auto bad_type = bytes;
  bad_type[4] = std::byte{7};
  EXPECT_THROW(decode(bad_type), ProtocolError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode(truncated), ProtocolError);
  EXPECT_THROW(decode_header(std::span(bytes).first(10)), ProtocolError);
  auto huge = bytes;
  huge[14] = std::byte{0x7f};
  EXPECT_THROW(decode_header(huge), ProtocolError);
}

TEST(Wire, SocketPairExchange) {
  int fds[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  const Message msg{MessageType::kGradient, 2, 7, std::vector<double>(5000, 0.25)};
  std::thread sender([&] { send_message(fds[0], msg); });
  const auto deadline = Clock::now() + std::chrono::seconds(5);
  EXPECT_EQ(receive_message(fds[1], deadline), msg);
  sender.join();
  ::close(fds[0]);
  EXPECT_THROW(receive_message(fds[1], deadline), PeerClosed);
  ::close(fds[1]);
}

TEST(Wire, ReceiveTimesOut) {
  int fds[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  EXPECT_THROW(receive_message(fds[1], Clock::now() + std::chrono::milliseconds(50)), Timeout);
  ::close(fds[0]);
  ::close(fds[1]);
}

}  // namespace
}  // namespace codedreduce::wire
