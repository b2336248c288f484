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

#include "codedreduce/transport.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "codedreduce/csv.hpp"
#include "codedreduce/wire.hpp"

namespace codedreduce::transport {

namespace {

using wire::Clock;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

class AbortError : public std::runtime_error {
 public:
  AbortError(NodeId parent, const std::string& what) : std::runtime_error(what), parent_(parent) {}
  NodeId parent() const { return parent_; }

 private:
  NodeId parent_;
};

// The parent finished (or died) without this node's message; nothing this
// node does can change the round any more.
class Superseded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void sys_fail(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

std::chrono::milliseconds remaining(Clock::time_point deadline) {
  return std::max(std::chrono::milliseconds(0),
                  std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
}

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw std::invalid_argument("bad IPv4 address '" + host + "'");
  return addr;
}

Socket listen_on(const std::string& host, std::uint16_t port, int backlog) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) sys_fail("socket");
  const int one = 1;
  ::setsockopt(s.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const sockaddr_in addr = make_address(host, port);
  if (::bind(s.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) sys_fail("bind");
  if (::listen(s.get(), backlog) != 0) sys_fail("listen");
  return s;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) sys_fail("getsockname");
  return ntohs(addr.sin_port);
}

// Retries refused connections until the deadline; the parent may not be
// listening yet, or may never come up.
Socket connect_to(const Endpoint& ep, Clock::time_point deadline) {
  const sockaddr_in addr = make_address(ep.host, ep.port);
  while (true) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) sys_fail("socket");
    if (::connect(s.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      const int one = 1;
      ::setsockopt(s.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    if (errno != ECONNREFUSED && errno != EINTR) sys_fail("connect to " + to_string(ep.node));
    if (Clock::now() >= deadline) throw wire::Timeout("could not reach parent " + to_string(ep.node));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

const Endpoint& endpoint_of(std::span<const Endpoint> endpoints, NodeId node) {
  for (const auto& ep : endpoints)
    if (ep.node == node) return ep;
  throw std::invalid_argument("no endpoint for " + to_string(node));
}

wire::Message make_message(wire::MessageType type, NodeId from, const Eigen::VectorXd& v) {
  return {type, static_cast<std::uint16_t>(from.layer), static_cast<std::uint32_t>(from.index),
          std::vector<double>(v.data(), v.data() + v.size())};
}

Eigen::VectorXd to_vector(const wire::Message& msg) {
  return Eigen::Map<const Eigen::VectorXd>(msg.payload.data(),
                                           static_cast<Eigen::Index>(msg.payload.size()));
}

struct ChildLink {
  Socket socket;
  bool delivered = false;
};

void best_effort_send(int fd, const wire::Message& msg) {
  try {
    wire::send_message(fd, msg);
  } catch (const std::exception&) {
    // The peer may already be gone; nothing to do.
  }
}

// Waits for the parent's shutdown (or its disappearance) so a node's process
// lives for the whole round.
void await_shutdown(int parent_fd, Clock::time_point deadline) {
  try {
    while (true) {
      const auto msg = wire::receive_message(parent_fd, deadline);
      if (msg.type == wire::MessageType::kShutdown) return;
    }
  } catch (const std::exception&) {
  }
}

void run_parent(const NodeContext& ctx, Socket parent, Socket listener, NodeReport& report,
                Clock::time_point deadline) {
  const auto& assignment = *ctx.assignment;
  const auto& tree = assignment.tree();
  const NodeId self = ctx.node;
  const int n = tree.fanout();
  const int s = assignment.code().stragglers();
  const int quorum = n - s;
  const bool is_master = self.layer == 0;

  std::vector<ChildLink> links;
  auto accept_child = [&]() -> ChildLink& {
    Socket c(::accept4(listener.get(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!c.valid()) sys_fail("accept");
    const int one = 1;
    ::setsockopt(c.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    links.push_back({std::move(c), false});
    return links.back();
  };

  // Model: the master owns it, everyone else waits for the parent while
  // already accepting children.
  ModelVec theta;
  if (is_master) {
    theta = ctx.theta;
  } else {
    while (theta.size() == 0) {
      std::vector<pollfd> fds{{parent.get(), POLLIN, 0}, {listener.get(), POLLIN, 0}};
      const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(remaining(deadline).count()));
      if (ready < 0 && errno != EINTR) sys_fail("poll");
      if (ready == 0 && Clock::now() >= deadline) throw wire::Timeout("no model from parent");
      if (fds[1].revents & POLLIN) accept_child();
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        wire::Message msg;
        try {
          msg = wire::receive_message(parent.get(), deadline);
        } catch (const wire::PeerClosed& e) {
          throw Superseded(std::string("parent closed before the model arrived: ") + e.what());
        }
        if (msg.type != wire::MessageType::kModel) throw wire::ProtocolError("expected a model broadcast");
        theta = to_vector(msg);
      }
    }
  }
  if (ctx.crash_before_compute) ::raise(SIGKILL);

  const auto model_msg = make_message(wire::MessageType::kModel, self, theta);
  for (auto& link : links) best_effort_send(link.socket.get(), model_msg);

  const GradientVec local = is_master ? GradientVec() : ctx.oracle(theta, assignment.local(self));

  std::vector<std::pair<int, GradientVec>> consumed;
  int lost = 0;
  while (static_cast<int>(consumed.size()) < quorum) {
    if (lost > s)
      throw AbortError(self, "parent " + to_string(self) + " lost " + std::to_string(lost) +
                                 " children, tolerates " + std::to_string(s));
    if (Clock::now() >= deadline)
      throw AbortError(self, "parent " + to_string(self) + " timed out with " +
                                 std::to_string(consumed.size()) + " of " + std::to_string(quorum) +
                                 " messages");
    std::vector<pollfd> fds{{listener.get(), POLLIN, 0}};
    std::vector<std::size_t> which;
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (!links[k].socket.valid()) continue;
      fds.push_back({links[k].socket.get(), POLLIN, 0});
      which.push_back(k);
    }
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(remaining(deadline).count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      sys_fail("poll");
    }
    if (ready == 0) continue;
    if (fds[0].revents & POLLIN) best_effort_send(accept_child().socket.get(), model_msg);
    for (std::size_t f = 1; f < fds.size(); ++f) {
      if (!(fds[f].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      auto& link = links[which[f - 1]];
      try {
        const auto msg = wire::receive_message(link.socket.get(), deadline);
        if (msg.type != wire::MessageType::kGradient) continue;
        const NodeId sender{msg.sender_layer, msg.sender_index};
        if (!tree.contains(sender) || sender.layer == 0 || tree.parent(sender) != self)
          throw wire::ProtocolError("gradient from " + to_string(sender) + ", not a child");
        link.delivered = true;
        const int slot = tree.slot_of(sender);
        const bool seen = std::any_of(consumed.begin(), consumed.end(),
                                      [slot](const auto& c) { return c.first == slot; });
        if (!seen && static_cast<int>(consumed.size()) < quorum)
          consumed.emplace_back(slot, to_vector(msg));
      } catch (const wire::PeerClosed&) {
        if (!link.delivered) ++lost;
        link.socket.reset();
      } catch (const wire::ProtocolError&) {
        if (!link.delivered) ++lost;
        link.socket.reset();
      } catch (const wire::Timeout&) {
        break;  // deadline hit mid-frame; the loop head reports it
      }
    }
  }

  std::vector<int> slots;
  for (const auto& c : consumed) slots.push_back(c.first);
  const DecodeRow row = decode_row(assignment.code(), slots);
  GradientVec sum = GradientVec::Zero(consumed.front().second.size());
  for (const auto& [slot, g] : consumed) sum += row.coefficients[slot] * g;
  std::sort(slots.begin(), slots.end());
  report.consumed = slots;

  if (is_master) {
    const auto tmp = ctx.output.string() + ".tmp";
    {
      std::ofstream out(tmp);
      csv::write_vector(out, sum);
      if (!out) throw std::runtime_error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, ctx.output);
  } else {
    sum += local;
    try {
      wire::send_message(parent.get(), make_message(wire::MessageType::kGradient, self, sum));
    } catch (const wire::PeerClosed& e) {
      throw Superseded(std::string("parent closed before the gradient was sent: ") + e.what());
    }
    await_shutdown(parent.get(), deadline);
  }
  const wire::Message bye{wire::MessageType::kShutdown, static_cast<std::uint16_t>(self.layer),
                          static_cast<std::uint32_t>(self.index), {}};
  for (auto& link : links)
    if (link.socket.valid()) best_effort_send(link.socket.get(), bye);
}

void run_leaf(const NodeContext& ctx, Socket parent, Clock::time_point deadline) {
  wire::Message msg;
  try {
    msg = wire::receive_message(parent.get(), deadline);
  } catch (const wire::PeerClosed& e) {
    throw Superseded(std::string("parent closed before the model arrived: ") + e.what());
  }
  if (msg.type != wire::MessageType::kModel) throw wire::ProtocolError("expected a model broadcast");
  const ModelVec theta = to_vector(msg);
  if (ctx.crash_before_compute) ::raise(SIGKILL);
  const GradientVec g = ctx.oracle(theta, ctx.assignment->local(ctx.node));
  try {
    wire::send_message(parent.get(), make_message(wire::MessageType::kGradient, ctx.node, g));
  } catch (const wire::PeerClosed& e) {
    throw Superseded(std::string("parent closed before the gradient was sent: ") + e.what());
  }
  await_shutdown(parent.get(), deadline);
}

}  // namespace

void write_endpoints(std::ostream& os, std::span<const Endpoint> endpoints) {
  os << "# layer index host port\n";
  for (const auto& ep : endpoints)
    os << ep.node.layer << ' ' << ep.node.index << ' ' << ep.host << ' ' << ep.port << '\n';
}

std::vector<Endpoint> read_endpoints(std::istream& is) {
  std::vector<Endpoint> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    Endpoint ep;
    int port = -1;
    if (!(fields >> ep.node.layer >> ep.node.index >> ep.host >> port) || port < 0 || port > 65535)
      throw std::runtime_error("bad endpoint line '" + line + "'");
    ep.port = static_cast<std::uint16_t>(port);
    out.push_back(std::move(ep));
  }
  return out;
}

Role role_of(const RegularTree& tree, NodeId node) {
  if (node.layer == 0) return Role::kMaster;
  return tree.is_leaf(node) ? Role::kLeaf : Role::kInternal;
}

NodeReport run_node(const NodeContext& ctx) {
  NodeReport report;
  report.node = ctx.node;
  try {
    if (!ctx.assignment || !ctx.oracle) throw std::invalid_argument("node context incomplete");
    const auto& tree = ctx.assignment->tree();
    const auto deadline = Clock::now() + ctx.deadline;
    const Role role = role_of(tree, ctx.node);

    Socket listener;
    if (role != Role::kLeaf) {
      if (ctx.listen_fd >= 0) {
        listener = Socket(ctx.listen_fd);
      } else {
        const auto& ep = endpoint_of(ctx.endpoints, ctx.node);
        listener = listen_on(ep.host, ep.port, tree.fanout() + 4);
      }
    }
    Socket parent;
    if (role != Role::kMaster)
      parent = connect_to(endpoint_of(ctx.endpoints, tree.parent(ctx.node)), deadline);

    if (role == Role::kLeaf) {
      run_leaf(ctx, std::move(parent), deadline);
    } else {
      run_parent(ctx, std::move(parent), std::move(listener), report, deadline);
    }
    report.ok = true;
  } catch (const Superseded& e) {
    report.ok = true;
    report.error = std::string("superseded: ") + e.what();
  } catch (const AbortError& e) {
    report.error = e.what();
    report.aborted_parent = e.parent();
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  return report;
}

void write_node_report(std::ostream& os, const NodeReport& report) {
  os << (report.ok ? "ok" : "error") << '\n';
  std::string error = report.error;
  std::replace(error.begin(), error.end(), '\n', ' ');
  os << error << '\n';
  if (report.aborted_parent)
    os << report.aborted_parent->layer << ' ' << report.aborted_parent->index << '\n';
  else
    os << "-\n";
  for (std::size_t i = 0; i < report.consumed.size(); ++i) os << (i ? "," : "") << report.consumed[i];
  os << '\n';
}

NodeReport read_node_report(std::istream& is, NodeId node) {
  NodeReport report;
  report.node = node;
  std::string status, aborted, consumed;
  if (!std::getline(is, status) || !std::getline(is, report.error) || !std::getline(is, aborted))
    throw std::runtime_error("truncated report for " + to_string(node));
  std::getline(is, consumed);
  report.ok = status == "ok";
  if (aborted != "-") {
    std::istringstream a(aborted);
    NodeId p;
    if (!(a >> p.layer >> p.index)) throw std::runtime_error("bad aborted parent in report");
    report.aborted_parent = p;
  }
  if (!consumed.empty())
    for (const auto& f : csv::split_line(consumed)) report.consumed.push_back(static_cast<int>(csv::parse_int(f)));
  return report;
}

StragglerPattern RunReport::realized_pattern(const RegularTree& tree) const {
  StragglerPattern pattern(tree);
  for (std::size_t p = 0; p < tree.parent_count(); ++p) {
    std::vector<int> missing;
    const NodeReport* report = p < nodes.size() ? &nodes[p] : nullptr;
    for (int slot = 0; slot < tree.fanout(); ++slot) {
      const bool used = report && report->ok &&
                        std::find(report->consumed.begin(), report->consumed.end(), slot) !=
                            report->consumed.end();
      if (!used) missing.push_back(slot);
    }
    pattern.set(p, std::move(missing));
  }
  return pattern;
}

RunReport orchestrate(const Assignment& assignment, const GradientOracle& oracle,
                      const ModelVec& theta, const FailurePlan& plan,
                      const TransportOptions& options) {
  const auto& tree = assignment.tree();
  const auto start = Clock::now();
  if (options.run_dir.empty()) throw std::invalid_argument("orchestrate needs a run directory");
  std::filesystem::create_directories(options.run_dir);

  auto action_of = [&plan](NodeId node) {
    const auto it = plan.find(node);
    return it == plan.end() ? FailureAction{} : it->second;
  };
  if (action_of(kMaster).kind != Failure::kNone)
    throw std::invalid_argument("the master cannot be part of the failure plan");

  std::vector<Socket> listeners;
  std::vector<Endpoint> endpoints;
  for (std::size_t p = 0; p < tree.parent_count(); ++p) {
    listeners.push_back(listen_on("127.0.0.1", 0, tree.fanout() + 4));
    endpoints.push_back({tree.node_at(p), "127.0.0.1", bound_port(listeners.back().get())});
  }
  const auto endpoints_path = options.run_dir / "endpoints.txt";
  {
    std::ofstream out(endpoints_path);
    write_endpoints(out, endpoints);
  }
  const auto master_output = options.run_dir / "master_gradient.csv";
  std::filesystem::remove(master_output);

  auto report_path = [&](NodeId node) {
    return options.run_dir /
           ("node_" + std::to_string(node.layer) + "_" + std::to_string(node.index) + ".report");
  };

  std::cout.flush();
  std::cerr.flush();
  std::vector<pid_t> pids(tree.node_count(), -1);
  for (std::size_t off = 0; off < tree.node_count(); ++off) {
    const NodeId node = tree.node_at(off);
    std::filesystem::remove(report_path(node));
    const FailureAction action = action_of(node);
    if (action.kind == Failure::kNeverStart) continue;
    const pid_t pid = ::fork();
    if (pid < 0) sys_fail("fork");
    if (pid == 0) {
      // Child: keep only this node's listener so dead peers surface as
      // refused or closed connections.
      int own = -1;
      for (std::size_t p = 0; p < listeners.size(); ++p) {
        if (p == off) own = listeners[p].get();
        else ::close(listeners[p].get());
      }
      int code = 1;
      try {
        std::ifstream in(endpoints_path);
        NodeContext ctx;
        ctx.assignment = &assignment;
        ctx.node = node;
        ctx.endpoints = read_endpoints(in);
        ctx.oracle = oracle;
        ctx.theta = theta;
        ctx.deadline = options.deadline;
        ctx.listen_fd = own;
        ctx.crash_before_compute = action.kind == Failure::kCrashBeforeCompute;
        ctx.output = master_output;
        const NodeReport report = run_node(ctx);
        std::ofstream out(report_path(node));
        write_node_report(out, report);
        out.flush();
        code = report.ok ? 0 : 1;
      } catch (...) {
      }
      ::_exit(code);
    }
    pids[off] = pid;
  }
  for (auto& l : listeners) l.reset();

  // Apply timed kills and wait for the master.
  const auto hard_stop = start + options.deadline + options.grace;
  std::vector<bool> reaped(pids.size(), false);
  std::vector<bool> killed(pids.size(), false);
  auto reap_some = [&]() {
    for (std::size_t off = 0; off < pids.size(); ++off) {
      if (pids[off] < 0 || reaped[off]) continue;
      int status = 0;
      if (::waitpid(pids[off], &status, WNOHANG) == pids[off]) reaped[off] = true;
    }
  };
  while (!reaped[0] && Clock::now() < hard_stop) {
    for (std::size_t off = 1; off < pids.size(); ++off) {
      const FailureAction action = action_of(tree.node_at(off));
      if (action.kind == Failure::kKillAfter && !killed[off] && pids[off] > 0 &&
          Clock::now() - start >= action.after) {
        ::kill(pids[off], SIGKILL);
        killed[off] = true;
      }
    }
    reap_some();
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  // After the master is done, a node whose parent process is gone can only be
  // retrying a connection or waiting for a model that never comes; give it a
  // moment to write its report, then stop it.
  std::vector<std::optional<Clock::time_point>> gone(pids.size());
  const auto grace_stop = std::min(hard_stop, Clock::now() + options.grace);
  constexpr auto kOrphanDelay = std::chrono::milliseconds(250);
  while (Clock::now() < grace_stop) {
    reap_some();
    const auto now = Clock::now();
    bool all = true;
    for (std::size_t off = 0; off < pids.size(); ++off) {
      if (pids[off] < 0 || reaped[off]) {
        if (!gone[off]) gone[off] = now;
        continue;
      }
      all = false;
      if (off == 0) continue;
      const std::size_t parent = tree.offset(tree.parent(tree.node_at(off)));
      if (gone[parent] && now - *gone[parent] >= kOrphanDelay && !killed[off]) {
        ::kill(pids[off], SIGKILL);
        killed[off] = true;
      }
    }
    if (all) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  for (std::size_t off = 0; off < pids.size(); ++off) {
    if (pids[off] > 0 && !reaped[off]) {
      ::kill(pids[off], SIGKILL);
      ::waitpid(pids[off], nullptr, 0);
    }
  }

  RunReport run;
  run.master_output = master_output;
  for (std::size_t off = 0; off < tree.node_count(); ++off) {
    const NodeId node = tree.node_at(off);
    std::ifstream in(report_path(node));
    if (in) {
      run.nodes.push_back(read_node_report(in, node));
    } else {
      NodeReport missing;
      missing.node = node;
      missing.error = action_of(node).kind == Failure::kNeverStart ? "never started"
                                                                    : "no report (process killed)";
      run.nodes.push_back(std::move(missing));
    }
    if (!run.aborted_parent && run.nodes.back().aborted_parent)
      run.aborted_parent = run.nodes.back().aborted_parent;
  }
  if (run.nodes.front().ok && std::filesystem::exists(master_output)) {
    std::ifstream in(master_output);
    run.gradient = csv::read_vector(in);
    run.recovered = true;
  }
  run.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return run;
}

}  // namespace codedreduce::transport
