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

#include <chrono>
#include <cmath>

#include "streamgate/reference.h"
#include "streamgate/scam.h"
#include "oracles.h"
#include "test_util.h"

namespace streamgate {
namespace {

using testing::reduced_causal_keep;
using testing::rule_allows;
using testing::small_layouts;

TEST(ScamMask, ExhaustiveSmallLayoutsMatchRuleAndReducedCausalOracle) {
  const auto start = std::chrono::steady_clock::now();
  const auto layouts = small_layouts();
  EXPECT_EQ(layouts.size(), 20u + 400u + 8000u);
  for (const InterleavedSequence& seq : layouts) {
    const SequenceLayout& layout = seq.layout;
    validate_layout(layout);
    const AttentionMask mask = build_scam_mask(layout);
    ASSERT_EQ(mask, reference::build_scam_mask(layout));
    const std::size_t n = layout.size();

    const std::vector<bool> kept = reduced_causal_keep(layout);
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t k = 0; k < n; ++k) {
        ASSERT_EQ(mask.allowed(q, k), rule_allows(layout, q, k)) << q << "," << k;
        if (kept[q] && kept[k]) {
          ASSERT_EQ(mask.allowed(q, k), k <= q);
        }
      }
      ASSERT_TRUE(mask.allowed(q, q));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 5.0);
}

TEST(ScamMask, SingleTurnIsPlainCausal) {
  const ClipTurns c{0, {{1}}, {{2}}};
  const auto seq = build_interleaved_sequence(std::span(&c, 1));
  EXPECT_EQ(build_scam_mask(seq.layout), AttentionMask::causal(2));
}

TEST(ScamMask, OwnClipEarlierCaptionBlocked) {
  // [F0, C0, F1, C1(final)], one token each.
  const ClipTurns c{0, {{1}, {2}}, {{3}}};
  const auto seq = build_interleaved_sequence(std::span(&c, 1));
  const AttentionMask m = build_scam_mask(seq.layout);
  EXPECT_TRUE(m.allowed(3, 0));
  EXPECT_FALSE(m.allowed(3, 1));
  EXPECT_TRUE(m.allowed(3, 2));
  EXPECT_TRUE(m.allowed(3, 3));
}

TEST(ScamMask, EarlierClipFinalCaptionVisible) {
  const ClipTurns clips[] = {{0, {{1}}, {{2}}}, {1, {{3}}, {{4}}}};
  const auto seq = build_interleaved_sequence(clips);
  const AttentionMask m = build_scam_mask(seq.layout);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_TRUE(m.allowed(3, k));
}

TEST(ScamMask, CaptionQueryAttendsOwnEarlierTokens) {
  const ClipTurns c{0, {{1}, {2}}, {{5, 6, 7}}};
  const auto seq = build_interleaved_sequence(std::span(&c, 1));
  const AttentionMask m = build_scam_mask(seq.layout);
  // First caption span is [1, 4).
  EXPECT_TRUE(m.allowed(3, 1));
  EXPECT_TRUE(m.allowed(3, 2));
  // The second turn's frame may not read it.
  EXPECT_FALSE(m.allowed(4, 1));
}

TEST(ScamMask, BitsetRowsAboveDenseLimit) {
  std::vector<ClipTurns> clips;
  for (ClipId k = 0; k < 40; ++k) {
    ClipTurns c{k, {}, {}};
    for (int f = 0; f < 4; ++f) {
      c.frames.push_back(TokenSeq(16, 1));
      c.captions.push_back(TokenSeq(11, 2));
    }
    clips.push_back(c);
  }
  const auto seq = build_interleaved_sequence(clips);
  const std::size_t n = seq.layout.size();
  ASSERT_GT(n, AttentionMask::kDenseLimit);
  const AttentionMask m = build_scam_mask(seq.layout);
  EXPECT_FALSE(m.dense());
  EXPECT_EQ(m, reference::build_scam_mask(seq.layout));
  const auto owner = span_index(seq.layout);
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t q = rng.below(n);
    const std::size_t k = rng.below(n);
    ASSERT_EQ(m.allowed(q, k), reference::scam_visible(seq.layout, owner, q, k));
  }
}

TEST(AttentionMask, PackBitsRowMajorLittleEndian) {
  const AttentionMask m = AttentionMask::causal(3);
  // Allowed cells: (0,0)=bit0 (1,0)=bit3 (1,1)=bit4 (2,0..2)=bits 6,7,8.
  const auto bits = m.pack_bits();
  ASSERT_EQ(bits.size(), 2u);
  EXPECT_EQ(bits[0], 0b11011001);
  EXPECT_EQ(bits[1], 0b00000001);
}

TEST(InterleavedSequence, OneClipOneFrame) {
  const ClipTurns c{0, {{1}}, {{2, 3}}};
  const auto seq = build_interleaved_sequence(std::span(&c, 1));
  ASSERT_EQ(seq.layout.spans.size(), 2u);
  EXPECT_EQ(seq.layout.spans[0], (Span{SpanKind::kFrame, 0, 0, false, 0, 1}));
  EXPECT_EQ(seq.layout.spans[1], (Span{SpanKind::kCaption, 0, 0, true, 1, 3}));
}

TEST(InterleavedSequence, OneClipTwoFrames) {
  const ClipTurns c{0, {{1}, {2}}, {{9}}};
  const auto seq = build_interleaved_sequence(std::span(&c, 1));
  ASSERT_EQ(seq.layout.spans.size(), 4u);
  EXPECT_FALSE(seq.layout.spans[1].clip_final);
  EXPECT_TRUE(seq.layout.spans[3].clip_final);
  EXPECT_EQ(seq.layout.spans[3].begin, 3u);
  EXPECT_EQ(seq.tokens[1].id, 9u);
  EXPECT_EQ(seq.tokens[3].id, 9u);
}

TEST(InterleavedSequence, TwoClipsBothFinal) {
  const ClipTurns clips[] = {{0, {{1}}, {{2}}}, {1, {{3}}, {{4}}}};
  const auto seq = build_interleaved_sequence(clips);
  EXPECT_TRUE(seq.layout.spans[1].clip_final);
  EXPECT_TRUE(seq.layout.spans[3].clip_final);
  EXPECT_EQ(seq.layout.spans[3].clip_ordinal, 1u);
}

TEST(InterleavedSequence, ZeroFramesRejected) {
  const ClipTurns c{7, {}, {{1}}};
  try {
    build_interleaved_sequence(std::span(&c, 1));
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "clip 7 has zero frames");
  }
}

TEST(LossMask, CaptionPositionsOnly) {
  const ClipTurns c{0, {{1}}, {{2, 3}}};
  EXPECT_EQ(build_loss_mask(build_interleaved_sequence(std::span(&c, 1)).layout),
            (LossMask{false, true, true}));
  const ClipTurns d{0, {{1}, {2}}, {{3}}};
  EXPECT_EQ(build_loss_mask(build_interleaved_sequence(std::span(&d, 1)).layout),
            (LossMask{false, true, false, true}));
  SequenceLayout frames_only{{Span{SpanKind::kFrame, 0, 0, false, 0, 3}}};
  EXPECT_EQ(build_loss_mask(frames_only), LossMask(3, false));
}

TEST(LayoutFromContext, CaptionsCloseClips) {
  ContextBuffer ctx;
  ctx.append(testing::frame(0, 0, {1, 1}));
  ctx.append(testing::caption({5}));
  ctx.append(testing::frame(1, 1, {2}));
  const SequenceLayout l = layout_from_context(ctx);
  validate_layout(l);
  ASSERT_EQ(l.spans.size(), 3u);
  EXPECT_TRUE(l.spans[1].clip_final);
  EXPECT_EQ(l.spans[2].clip_ordinal, 1u);
  EXPECT_TRUE(build_scam_mask(l).allowed(3, 2));
}

TEST(ValidateLayout, RejectsGapsAndMissingFinal) {
  SequenceLayout gap{{Span{SpanKind::kFrame, 0, 0, false, 0, 1},
                      Span{SpanKind::kCaption, 0, 0, true, 2, 3}}};
  EXPECT_THROW(validate_layout(gap), InvalidArgument);
  SequenceLayout no_final{{Span{SpanKind::kFrame, 0, 0, false, 0, 1},
                           Span{SpanKind::kCaption, 0, 0, false, 1, 2},
                           Span{SpanKind::kFrame, 1, 1, false, 2, 3}}};
  EXPECT_THROW(validate_layout(no_final), InvalidArgument);
}

TEST(SampleCaption, SingletonConsumesNoRandomness) {
  const std::vector<std::string> pool = {"a"};
  Rng r(5);
  Rng fresh(5);
  EXPECT_EQ(sample_caption(std::span<const std::string>(pool), r), "a");
  EXPECT_EQ(r.next_u64(), fresh.next_u64());
}

TEST(SampleCaption, EmptyPoolThrows) {
  const std::vector<std::string> pool;
  Rng r(1);
  EXPECT_THROW(sample_caption(std::span<const std::string>(pool), r), InvalidArgument);
}

TEST(SampleCaption, SeededDrawIsReproducible) {
  const std::vector<std::string> pool = {"a", "b", "c"};
  Rng r1(7);
  Rng r2(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_caption(std::span<const std::string>(pool), r1),
              sample_caption(std::span<const std::string>(pool), r2));
  }
}

TEST(SampleCaption, UniformWithinThreeSigma) {
  const std::vector<std::string> pool = {"a", "b", "c"};
  Rng r(7);
  const int n = 100000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const std::string& s = sample_caption(std::span<const std::string>(pool), r);
    ++counts[s[0] - 'a'];
  }
  const double sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_LT(std::abs(c - n / 3.0), 3 * sigma);
    chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
  }
  // 99.9% quantile of chi-square with 2 degrees of freedom.
  EXPECT_LT(chi2, 13.82);
}

}  // namespace
}  // namespace streamgate
