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

#include <sstream>

#include "streamgate/error.h"
#include "streamgate/rng.h"
#include "streamgate/trace.h"
#include "test_util.h"

namespace streamgate {
namespace {

ParsedTrace parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

// Returns the TraceError raised by parsing `text`.
TraceError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const TraceError& e) {
    return e;
  }
  ADD_FAILURE() << "no TraceError for: " << text;
  return TraceError(0, "");
}

TEST(ParseTrace, MinimalTrace) {
  const ParsedTrace p = parse(
      R"({"type":"frame","t":0.0,"frame_index":0,"tokens":[1,2]})" "\n"
      R"({"type":"frame","t":0.333,"frame_index":1,"tokens":[3,4]})" "\n"
      R"({"type":"gt_clip","clip_id":0,"t_start":0,"t_end":5,"anchor":1.0,"captions":["a man"]})" "\n");
  ASSERT_EQ(p.trace.frames.size(), 2u);
  EXPECT_DOUBLE_EQ(p.trace.frames[1].timestamp_s, 0.333);
  EXPECT_EQ(p.trace.frames[1].tokens, (TokenSeq{3, 4}));
  ASSERT_EQ(p.trace.timeline.size(), 1u);
  EXPECT_DOUBLE_EQ(p.trace.timeline.clips[0].anchor_s, 1.0);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(ParseTrace, EmptyClipInterval) {
  const TraceError e =
      parse_error(R"({"type":"gt_clip","clip_id":0,"t_start":5,"t_end":5,"captions":["x"]})");
  EXPECT_EQ(e.reason(), "empty clip interval");
  EXPECT_EQ(e.line(), 1u);
}

TEST(ParseTrace, NonMonotoneTimestampsReportLine) {
  const TraceError e = parse_error(
      R"({"type":"frame","t":1.0,"frame_index":0,"tokens":[1]})" "\n"
      R"({"type":"frame","t":0.5,"frame_index":1,"tokens":[1]})" "\n");
  EXPECT_EQ(e.reason(), "non-monotone timestamps");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_STREQ(e.what(), "line 2: non-monotone timestamps");
  EXPECT_EQ(e.code(), ExitCode::kTrace);
}

TEST(ParseTrace, MalformedJson) {
  const TraceError e = parse_error("\n{\"type\":\"frame\",\n");
  EXPECT_EQ(e.reason(), "malformed JSON record");
  EXPECT_EQ(e.line(), 2u);
}

TEST(ParseTrace, AnchorOutsideClip) {
  EXPECT_EQ(parse_error(R"({"type":"gt_clip","clip_id":0,"t_start":0,"t_end":5,"anchor":5,"captions":["x"]})")
                .reason(),
            "anchor outside clip");
}

TEST(ParseTrace, AnchorDefaultsToStart) {
  const ParsedTrace p =
      parse(R"({"type":"gt_clip","clip_id":3,"t_start":2,"t_end":5,"captions":["x"]})");
  EXPECT_DOUBLE_EQ(p.trace.timeline.clips[0].anchor_s, 2.0);
}

TEST(ParseTrace, UnknownRecordIsSkippedWithWarning) {
  const ParsedTrace p = parse(R"({"type":"audio","t":0})" "\n"
                              R"({"type":"frame","t":0,"frame_index":0,"tokens":[1]})");
  EXPECT_EQ(p.trace.frames.size(), 1u);
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("line 1"), std::string::npos);
}

TEST(ParseTrace, OverlappingClipsCarryLine) {
  const TraceError e = parse_error(
      R"({"type":"gt_clip","clip_id":0,"t_start":0,"t_end":6,"captions":["x"]})" "\n"
      R"({"type":"gt_clip","clip_id":1,"t_start":5,"t_end":10,"captions":["y"]})" "\n");
  EXPECT_EQ(e.reason(), "overlap at t=5..6");
  EXPECT_EQ(e.line(), 2u);
}

TEST(ParseTrace, TokenPoolForUnknownClip) {
  EXPECT_THROW(parse(R"({"type":"gt_caption_tokens","clip_id":4,"pool":[[1]]})"), TraceError);
}

TEST(ParseTrace, MissingFileNamesPath) {
  try {
    parse_trace("/nonexistent/trace.ndjson");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/trace.ndjson"), std::string::npos);
  }
}

SemanticClip clip(ClipId id, double a, double b, std::vector<std::string> pool = {"c"}) {
  return SemanticClip{id, a, b, a, std::move(pool)};
}

TEST(ValidateTimeline, AdjacentClipsAccepted) {
  const Timeline t = validate_timeline(Timeline{{clip(0, 0, 5), clip(1, 5, 10)}});
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.clips[0].clip_id, 0u);
  EXPECT_EQ(t.clips[1].clip_id, 1u);
}

TEST(ValidateTimeline, SortsByStart) {
  const Timeline t = validate_timeline(Timeline{{clip(1, 5, 10), clip(0, 0, 5)}});
  EXPECT_EQ(t.clips[0].clip_id, 0u);
}

TEST(ValidateTimeline, Overlap) {
  try {
    validate_timeline(Timeline{{clip(0, 0, 6), clip(1, 5, 10)}});
    FAIL();
  } catch (const TraceError& e) {
    EXPECT_EQ(e.reason(), "overlap at t=5..6");
  }
}

TEST(ValidateTimeline, EmptyPool) {
  try {
    validate_timeline(Timeline{{clip(0, 0, 5, {})}});
    FAIL();
  } catch (const TraceError& e) {
    EXPECT_EQ(e.reason(), "empty pool");
  }
}

TEST(ValidateTimeline, DuplicateId) {
  EXPECT_THROW(validate_timeline(Timeline{{clip(0, 0, 5), clip(0, 5, 10)}}), TraceError);
}

// Random valid traces survive serialize -> parse unchanged.
TEST(TraceRoundTrip, RandomTraces) {
  Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    Trace t;
    double now = rng.uniform();
    const int frames = static_cast<int>(rng.below(6));
    for (int i = 0; i < frames; ++i) {
      FrameBlock f;
      f.timestamp_s = now;
      f.frame_index = i;
      for (std::uint64_t k = 0, n = 1 + rng.below(4); k < n; ++k) {
        f.tokens.push_back(static_cast<TokenId>(rng.below(1u << 31)));
      }
      t.frames.push_back(f);
      now += 0.001 + rng.uniform();
    }
    double start = rng.uniform() * 3;
    const int clips = static_cast<int>(rng.below(4));
    for (int k = 0; k < clips; ++k) {
      const double len = 0.01 + rng.uniform() * 5;
      SemanticClip c{static_cast<ClipId>(k * 3 + 1), start, start + len,
                     start + rng.uniform() * len * 0.99, {"caption é", "two"}};
      t.timeline.clips.push_back(c);
      if (rng.below(2) == 0) t.caption_tokens[c.clip_id] = {{1, 2}, {3}};
      start += len + rng.uniform();
    }
    std::ostringstream out;
    serialize_trace(t, out);
    std::istringstream in(out.str());
    const ParsedTrace back = parse_trace(in);
    ASSERT_EQ(back.trace, t) << out.str();
  }
}

}  // namespace
}  // namespace streamgate
