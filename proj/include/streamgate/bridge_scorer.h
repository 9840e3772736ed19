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

// Client for out-of-process scorers speaking newline-delimited JSON:
//
//   {"id":N,"op":"score","ctx":[...],"cont":[...]}
//     -> {"id":N,"logprobs":[...]}
//   {"id":N,"op":"generate","ctx":[...],"max_len":M}
//     -> {"id":N,"tokens":[...],"logprobs":[...]}
//   any failure -> {"id":N,"error":"..."}
//
// One request is in flight per connection. The server owns vocabulary
// checks; every protocol or transport failure surfaces as ScorerError.

#ifndef STREAMGATE_BRIDGE_SCORER_H_
#define STREAMGATE_BRIDGE_SCORER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "streamgate/scorer.h"

namespace streamgate {

class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void write_line(std::string_view line) = 0;
  // nullopt once the peer has closed the stream.
  virtual std::optional<std::string> read_line() = 0;
};

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, std::uint16_t port);
// Runs `command` under /bin/sh with its stdin/stdout as the channel.
std::unique_ptr<LineTransport> spawn_process(const std::string& command);

struct BridgeOptions {
  int max_generation_len = 32;
  std::size_t context_limit = kDefaultContextBudget;
};

class BridgeScorer : public Scorer {
 public:
  // Performs the handshake (an empty score request, id 0).
  BridgeScorer(std::unique_ptr<LineTransport> transport, BridgeOptions options = {});

  // `endpoint` is "tcp://HOST:PORT" or "cmd:COMMAND".
  static std::unique_ptr<BridgeScorer> open(const std::string& endpoint,
                                            BridgeOptions options = {});

  const ScorerConfig& config() const override { return config_; }
  ScoreResult score(std::span<const TokenId> context,
                    std::span<const TokenId> continuation,
                    const AttentionMask* mask = nullptr) override;
  Generation generate(std::span<const TokenId> context, int max_len) override;

 private:
  std::string round_trip(const std::string& request, std::int64_t id);

  std::unique_ptr<LineTransport> transport_;
  ScorerConfig config_;
  std::int64_t next_id_ = 0;
};

// Server-side handling of one request line against an in-process scorer.
// Never throws; malformed input yields an error response with id -1.
std::string serve_request(Scorer& scorer, std::string_view line);

}  // namespace streamgate

#endif  // STREAMGATE_BRIDGE_SCORER_H_
