// Copyright 2026 The StreamGate Authors.
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

#include "streamgate/bridge_scorer.h"

#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <limits>
#include <thread>

#include "json.hpp"
#include "streamgate/error.h"
#include "streamgate/log.h"

namespace streamgate {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Buffered line reader/writer over a pair of file descriptors.
class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  ~FdTransport() override { close_fds(); }

  void write_line(std::string_view line) override {
    std::string buf(line);
    buf += '\n';
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = send_bytes(buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("bridge: write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line() override {
    for (;;) {
      if (auto pos = pending_.find('\n'); pos != std::string::npos) {
        std::string line = pending_.substr(0, pos);
        pending_.erase(0, pos + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("bridge: read failed: ") + std::strerror(errno));
      }
      if (n == 0) return std::nullopt;
      pending_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t send_bytes(const char* data, std::size_t len) {
    return ::write(write_fd_, data, len);
  }

  void close_fds() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
  }

  void close_write() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    write_fd_ = -1;
  }

  int read_fd_;
  int write_fd_;

 private:
  std::string pending_;
};

class SocketTransport : public FdTransport {
 public:
  explicit SocketTransport(int fd) : FdTransport(fd, fd) {}

 protected:
  ssize_t send_bytes(const char* data, std::size_t len) override {
    return ::send(write_fd_, data, len, MSG_NOSIGNAL);
  }
};

class ProcessTransport : public FdTransport {
 public:
  ProcessTransport(int read_fd, int write_fd, pid_t pid)
      : FdTransport(read_fd, write_fd), pid_(pid) {}

  ~ProcessTransport() override {
    // Closing stdin asks the server to shut down.
    close_write();
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

std::vector<TokenId> token_array(const json& j, const char* key) {
  std::vector<TokenId> out;
  for (const json& v : j.at(key)) {
    const auto x = v.get<std::int64_t>();
    if (x < 0 || x > std::numeric_limits<TokenId>::max()) {
      throw InvalidArgument(std::string("token out of range in ") + key);
    }
    out.push_back(static_cast<TokenId>(x));
  }
  return out;
}

std::vector<double> logprob_array(const json& j) {
  if (!j.contains("logprobs") || !j["logprobs"].is_array()) {
    throw ScorerError("bridge: response without logprobs");
  }
  std::vector<double> out;
  for (const json& v : j["logprobs"]) {
    if (!v.is_number()) throw ScorerError("bridge: non-numeric logprob");
    const double lp = v.get<double>();
    if (!(lp <= 0.0)) throw ScorerError("bridge: logprob above zero");
    out.push_back(lp);
  }
  return out;
}

std::string reply(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw ScorerError("bridge: cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ScorerError("bridge: cannot connect to " + host + ":" + service);
  return std::make_unique<SocketTransport>(fd);
}

std::unique_ptr<LineTransport> spawn_process(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ScorerError("bridge: pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerError("bridge: pipe failed");
  }
  // A dead server must surface as a write error, not a signal.
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerError("bridge: fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ProcessTransport>(from_child[0], to_child[1], pid);
}

BridgeScorer::BridgeScorer(std::unique_ptr<LineTransport> transport, BridgeOptions options)
    : transport_(std::move(transport)) {
  config_.vocabulary_size = std::uint64_t{1} << 32;
  config_.deterministic = true;
  config_.max_generation_len = options.max_generation_len;
  config_.context_limit = options.context_limit;
  config_.concurrent = false;

  const std::int64_t id = next_id_++;
  const ordered_json req = {{"id", id}, {"op", "score"}, {"ctx", json::array()},
                    {"cont", json::array()}};
  try {
    const json resp = json::parse(round_trip(req.dump(), id));
    if (!logprob_array(resp).empty()) throw ScorerError("bridge: bad handshake reply");
  } catch (const json::exception& e) {
    throw ScorerError(std::string("bridge: handshake failed: ") + e.what());
  } catch (const ScorerError& e) {
    throw ScorerError(std::string("bridge: handshake failed: ") + e.what());
  }
  log().debug("bridge handshake ok");
}

std::unique_ptr<BridgeScorer> BridgeScorer::open(const std::string& endpoint,
                                                 BridgeOptions options) {
  if (endpoint.rfind("tcp://", 0) == 0) {
    const std::string rest = endpoint.substr(6);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw InvalidArgument("bridge endpoint needs HOST:PORT: " + endpoint);
    }
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      port = -1;
    }
    if (port <= 0 || port > 65535) throw InvalidArgument("bad bridge port: " + endpoint);
    return std::make_unique<BridgeScorer>(
        connect_tcp(rest.substr(0, colon), static_cast<std::uint16_t>(port)), options);
  }
  if (endpoint.rfind("cmd:", 0) == 0 && endpoint.size() > 4) {
    return std::make_unique<BridgeScorer>(spawn_process(endpoint.substr(4)), options);
  }
  throw InvalidArgument("unknown bridge endpoint: " + endpoint);
}

std::string BridgeScorer::round_trip(const std::string& request, std::int64_t id) {
  transport_->write_line(request);
  std::optional<std::string> line = transport_->read_line();
  if (!line) throw ScorerError("bridge: connection closed");
  json resp;
  try {
    resp = json::parse(*line);
  } catch (const json::exception&) {
    throw ScorerError("bridge: malformed response");
  }
  if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_number_integer()) {
    throw ScorerError("bridge: response without id");
  }
  if (resp.contains("error")) {
    throw ScorerError("bridge: " + resp["error"].dump());
  }
  if (resp["id"].get<std::int64_t>() != id) {
    throw ScorerError("bridge: response id mismatch");
  }
  return *line;
}

ScoreResult BridgeScorer::score(std::span<const TokenId> context,
                                std::span<const TokenId> continuation,
                                const AttentionMask* /*mask*/) {
  check_context(config_, context.size(), continuation.size());
  const std::int64_t id = next_id_++;
  const ordered_json req = {{"id", id},
                    {"op", "score"},
                    {"ctx", std::vector<TokenId>(context.begin(), context.end())},
                    {"cont", std::vector<TokenId>(continuation.begin(), continuation.end())}};
  const json resp = json::parse(round_trip(req.dump(), id));
  ScoreResult out{logprob_array(resp)};
  if (out.size() != continuation.size()) {
    throw ScorerError("bridge: expected " + std::to_string(continuation.size()) +
                      " logprobs, got " + std::to_string(out.size()));
  }
  return out;
}

Generation BridgeScorer::generate(std::span<const TokenId> context, int max_len) {
  if (max_len < 0 || max_len > config_.max_generation_len) {
    throw InvalidArgument("generate: max_len out of range");
  }
  check_context(config_, context.size(), static_cast<std::size_t>(max_len));
  const std::int64_t id = next_id_++;
  const ordered_json req = {{"id", id},
                    {"op", "generate"},
                    {"ctx", std::vector<TokenId>(context.begin(), context.end())},
                    {"max_len", max_len}};
  const json resp = json::parse(round_trip(req.dump(), id));
  Generation out;
  try {
    out.tokens = token_array(resp, "tokens");
  } catch (const std::exception&) {
    throw ScorerError("bridge: bad tokens in generate response");
  }
  out.score.logprobs = logprob_array(resp);
  if (out.tokens.size() > static_cast<std::size_t>(max_len) ||
      out.tokens.size() != out.score.size()) {
    throw ScorerError("bridge: inconsistent generate response");
  }
  return out;
}

std::string serve_request(Scorer& scorer, std::string_view line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception&) {
    return reply({{"id", -1}, {"error", "malformed request"}});
  }
  if (!req.is_object() || !req.contains("id") || !req["id"].is_number_integer()) {
    return reply({{"id", -1}, {"error", "malformed request"}});
  }
  const auto id = req["id"].get<std::int64_t>();
  try {
    const std::string op = req.value("op", "");
    if (op == "score") {
      const auto ctx = token_array(req, "ctx");
      const auto cont = token_array(req, "cont");
      const ScoreResult r = scorer.score(ctx, cont);
      return reply({{"id", id}, {"logprobs", r.logprobs}});
    }
    if (op == "generate") {
      const auto ctx = token_array(req, "ctx");
      const Generation g = scorer.generate(ctx, req.at("max_len").get<int>());
      return reply({{"id", id}, {"tokens", g.tokens}, {"logprobs", g.score.logprobs}});
    }
    return reply({{"id", id}, {"error", "unknown op"}});
  } catch (const std::exception& e) {
    return reply({{"id", id}, {"error", e.what()}});
  }
}

}  // namespace streamgate
