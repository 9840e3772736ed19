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

#include <gtest/gtest.h>

#include <deque>

#include "json.hpp"
#include "streamgate/bridge_scorer.h"
#include "streamgate/error.h"
#include "streamgate/sved.h"
#include "streamgate/synth.h"
#include "streamgate/table_scorer.h"
#include "test_util.h"

namespace streamgate {
namespace {

using nlohmann::json;
using testing::LoopbackServer;
using testing::TempDir;

// In-memory transport with canned replies; records every request.
class FakeTransport : public LineTransport {
 public:
  explicit FakeTransport(std::deque<std::string> replies, std::vector<std::string>* sent)
      : replies_(std::move(replies)), sent_(sent) {}
  void write_line(std::string_view line) override { sent_->emplace_back(line); }
  std::optional<std::string> read_line() override {
    if (replies_.empty()) return std::nullopt;
    std::string r = replies_.front();
    replies_.pop_front();
    return r;
  }

 private:
  std::deque<std::string> replies_;
  std::vector<std::string>* sent_;
};

std::unique_ptr<BridgeScorer> fake(std::deque<std::string> replies,
                                   std::vector<std::string>* sent) {
  replies.push_front(R"({"id":0,"logprobs":[]})");
  return std::make_unique<BridgeScorer>(std::make_unique<FakeTransport>(replies, sent));
}

TEST(BridgeProtocol, RequestShapes) {
  std::vector<std::string> sent;
  auto b = fake({R"({"id":1,"logprobs":[-0.5]})",
                 R"({"id":2,"tokens":[4],"logprobs":[-0.25]})"},
                &sent);
  EXPECT_EQ(sent[0], R"({"id":0,"op":"score","ctx":[],"cont":[]})");
  const TokenSeq ctx = {1, 2};
  const TokenSeq cont = {3};
  EXPECT_EQ(b->score(ctx, cont).logprobs, std::vector<double>{-0.5});
  EXPECT_EQ(sent[1], R"({"id":1,"op":"score","ctx":[1,2],"cont":[3]})");
  const Generation g = b->generate(ctx, 5);
  EXPECT_EQ(sent[2], R"({"id":2,"op":"generate","ctx":[1,2],"max_len":5})");
  EXPECT_EQ(g.tokens, TokenSeq{4});
  EXPECT_EQ(g.score.logprobs, std::vector<double>{-0.25});
}

TEST(BridgeProtocol, FailuresSurfaceAsScorerError) {
  const TokenSeq ctx = {1};
  const TokenSeq cont = {3, 4};
  const char* bad[] = {
      R"({"id":1,"error":"boom"})",
      R"({"id":7,"logprobs":[-1,-1]})",
      R"({"id":1,"logprobs":[-1]})",
      R"({"id":1,"logprobs":[0.5,-1]})",
      R"({"id":1})",
      "not json",
  };
  for (const char* reply : bad) {
    std::vector<std::string> sent;
    auto b = fake({reply}, &sent);
    EXPECT_THROW(b->score(ctx, cont), ScorerError) << reply;
  }
  std::vector<std::string> sent;
  auto closed = fake({}, &sent);
  EXPECT_THROW(closed->score(ctx, cont), ScorerError);
  EXPECT_THROW(fake({R"({"id":1,"tokens":[1,2],"logprobs":[-1]})"}, &sent)->generate(ctx, 4),
               ScorerError);
  EXPECT_THROW(fake({R"({"id":1,"tokens":[1,2,3],"logprobs":[-1,-1,-1]})"}, &sent)
                   ->generate(ctx, 2),
               ScorerError);
}

TEST(BridgeProtocol, HandshakeFailure) {
  std::vector<std::string> sent;
  EXPECT_THROW(BridgeScorer(std::make_unique<FakeTransport>(
                   std::deque<std::string>{R"({"id":0,"error":"no"})"}, &sent)),
               ScorerError);
  EXPECT_THROW(BridgeScorer::open("udp://x"), InvalidArgument);
}

TEST(ServeRequest, Replies) {
  Scenario sc;
  sc.vocabulary_size = 16;
  sc.end_token = 15;
  sc.add_suffix({1}, 5, -0.5);
  TableScorer table(sc);
  EXPECT_EQ(json::parse(serve_request(table, R"({"id":3,"op":"score","ctx":[1],"cont":[5]})")),
            json::parse(R"({"id":3,"logprobs":[-0.5]})"));
  const json g =
      json::parse(serve_request(table, R"({"id":4,"op":"generate","ctx":[1],"max_len":3})"));
  EXPECT_EQ(g.at("tokens"), json::array({5}));
  EXPECT_EQ(json::parse(serve_request(table, R"({"id":5,"op":"x"})")).at("id"), 5);
  EXPECT_TRUE(json::parse(serve_request(table, R"({"id":5,"op":"x"})")).contains("error"));
  EXPECT_EQ(json::parse(serve_request(table, "{")).at("id"), -1);
  const json oov =
      json::parse(serve_request(table, R"({"id":6,"op":"score","ctx":[99],"cont":[]})"));
  EXPECT_TRUE(oov.contains("error"));
}

TEST(ServeRequest, FuzzNeverThrows) {
  Scenario sc;
  sc.vocabulary_size = 8;
  TableScorer table(sc);
  Rng rng(99);
  const std::string alphabet = "{}[]\":,0123456789-.eidopctxscorenmaxlgt \xff\x80";
  for (int i = 0; i < 20000; ++i) {
    std::string line;
    const auto n = rng.below(60);
    for (std::uint64_t k = 0; k < n; ++k) line.push_back(alphabet[rng.below(alphabet.size())]);
    if (i % 3 == 0) line = R"({"id":1,"op":"score","ctx":[)" + line;
    std::string reply;
    ASSERT_NO_THROW(reply = serve_request(table, line)) << line;
    ASSERT_TRUE(json::accept(reply)) << reply;
  }
}

// Gate decisions through the bridge equal those of the in-process scorer.
std::vector<GateDecision> run_gate(const ScriptedStream& s, Scorer& scorer) {
  SvedConfig cfg;
  cfg.tokens_per_frame = static_cast<int>(s.trace.frames[0].tokens.size());
  SvedSession session(cfg);
  for (const FrameBlock& f : s.trace.frames) session.ingest(f, scorer);
  return session.decisions();
}

TEST(BridgeScorer, TcpLoopbackMatchesInProcess) {
  const ScriptedStream s = make_scripted_stream(long_stream_config(1, 120));
  TableScorer table(s.scenario);
  LoopbackServer server(table);
  auto bridge = BridgeScorer::open(server.endpoint());
  EXPECT_FALSE(bridge->config().concurrent);
  EXPECT_EQ(run_gate(s, *bridge), run_gate(s, table));
}

TEST(BridgeScorer, StdioProcessMatchesInProcess) {
  TempDir dir;
  const ScriptedStream s = make_scripted_stream(two_clip_config());
  write_scripted_stream(s, dir.path(), "clip");
  TableScorer table(s.scenario);
  auto bridge = BridgeScorer::open(std::string("cmd:") + STREAMGATE_BRIDGE_FIXTURE + " " +
                                   (dir / "clip.scenario.json").string());
  EXPECT_EQ(run_gate(s, *bridge), run_gate(s, table));
}

TEST(BridgeScorer, CrashedServerIsScorerError) {
  TempDir dir;
  const ScriptedStream s = make_scripted_stream(two_clip_config());
  write_scripted_stream(s, dir.path(), "clip");
  auto bridge = BridgeScorer::open(std::string("cmd:") + STREAMGATE_BRIDGE_FIXTURE + " " +
                                   (dir / "clip.scenario.json").string() + " --crash 3");
  try {
    run_gate(s, *bridge);
    FAIL() << "expected ScorerError";
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.code(), ExitCode::kScorer);
  }
}

TEST(BridgeScorer, UnreachableEndpoint) {
  // Bind and close a socket to find a port with no listener.
  std::uint16_t port;
  {
    Scenario sc;
    TableScorer t(sc);
    LoopbackServer probe(t);
    port = probe.port();
  }
  EXPECT_THROW(BridgeScorer::open("tcp://127.0.0.1:" + std::to_string(port)), ScorerError);
  EXPECT_THROW(BridgeScorer::open("cmd:exit 0"), ScorerError);
}

}  // namespace
}  // namespace streamgate
