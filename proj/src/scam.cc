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

#include "streamgate/scam.h"

#include <algorithm>
#include <cstring>
#include <string>

namespace streamgate {

void validate_layout(const SequenceLayout& layout) {
  const auto& spans = layout.spans;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Span& s = spans[i];
    const std::string where = "span " + std::to_string(i) + ": ";
    if (s.begin != pos) throw InvalidArgument(where + "not contiguous");
    if (s.end <= s.begin) throw InvalidArgument(where + "empty span");
    pos = s.end;
    if (i == 0) {
      if (s.clip_ordinal != 0) {
        throw InvalidArgument(where + "first clip ordinal must be 0");
      }
    } else {
      const Span& prev = spans[i - 1];
      if (s.clip_ordinal == prev.clip_ordinal) {
        if (s.clip_id != prev.clip_id) {
          throw InvalidArgument(where + "clip id changes inside a clip");
        }
        if (prev.clip_final) {
          throw InvalidArgument(where + "span after the clip-final caption");
        }
      } else if (s.clip_ordinal == prev.clip_ordinal + 1) {
        if (!prev.clip_final) {
          throw InvalidArgument(where + "clip " +
                                std::to_string(prev.clip_ordinal) +
                                " has no clip-final caption");
        }
      } else {
        throw InvalidArgument(where + "clip ordinals must increase by one");
      }
    }
    if (s.kind == SpanKind::kFrame && s.clip_final) {
      throw InvalidArgument(where + "frame span flagged clip-final");
    }
  }
  // The trailing clip may be open, but an open clip must not hold captions.
  if (!spans.empty() && !spans.back().clip_final) {
    const std::size_t last = spans.back().clip_ordinal;
    for (auto it = spans.rbegin(); it != spans.rend() && it->clip_ordinal == last;
         ++it) {
      if (it->is_caption()) {
        throw InvalidArgument("clip " + std::to_string(last) +
                              " has captions but no clip-final caption");
      }
    }
  }
}

std::vector<std::uint32_t> span_index(const SequenceLayout& layout) {
  std::vector<std::uint32_t> out(layout.size());
  for (std::size_t s = 0; s < layout.spans.size(); ++s) {
    std::fill(out.begin() + layout.spans[s].begin,
              out.begin() + layout.spans[s].end, static_cast<std::uint32_t>(s));
  }
  return out;
}

AttentionMask::AttentionMask(std::size_t n) : n_(n) {
  if (dense()) {
    cells_.assign(n * n, 0);
  } else {
    words_ = (n + 63) / 64;
    bits_.assign(n * words_, 0);
  }
}

AttentionMask AttentionMask::causal(std::size_t n) {
  AttentionMask m(n);
  for (std::size_t q = 0; q < n; ++q) m.set_range(q, 0, q + 1);
  return m;
}

void AttentionMask::set(std::size_t q, std::size_t k, bool v) {
  if (dense()) {
    cells_[q * n_ + k] = v ? 1 : 0;
    return;
  }
  std::uint64_t& w = bits_[q * words_ + k / 64];
  const std::uint64_t bit = std::uint64_t{1} << (k % 64);
  w = v ? (w | bit) : (w & ~bit);
}

void AttentionMask::set_range(std::size_t q, std::size_t begin, std::size_t end) {
  if (begin >= end) return;
  if (dense()) {
    std::memset(&cells_[q * n_ + begin], 1, end - begin);
    return;
  }
  std::uint64_t* row = &bits_[q * words_];
  std::size_t k = begin;
  for (; k < end && k % 64 != 0; ++k) row[k / 64] |= std::uint64_t{1} << (k % 64);
  while (k + 64 <= end) {
    row[k / 64] = ~std::uint64_t{0};
    k += 64;
  }
  for (; k < end; ++k) row[k / 64] |= std::uint64_t{1} << (k % 64);
}

std::vector<std::uint8_t> AttentionMask::pack_bits() const {
  std::vector<std::uint8_t> out((n_ * n_ + 7) / 8, 0);
  for (std::size_t q = 0; q < n_; ++q) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (!allowed(q, k)) continue;
      const std::size_t bit = q * n_ + k;
      out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

bool operator==(const AttentionMask& a, const AttentionMask& b) {
  return a.n_ == b.n_ && a.cells_ == b.cells_ && a.bits_ == b.bits_;
}

InterleavedSequence build_interleaved_sequence(std::span<const ClipTurns> clips) {
  InterleavedSequence out;
  std::size_t pos = 0;
  for (std::size_t ord = 0; ord < clips.size(); ++ord) {
    const ClipTurns& clip = clips[ord];
    if (clip.frames.empty()) {
      throw InvalidArgument("clip " + std::to_string(clip.clip_id) +
                            " has zero frames");
    }
    if (clip.captions.size() != 1 && clip.captions.size() != clip.frames.size()) {
      throw InvalidArgument("clip " + std::to_string(clip.clip_id) +
                            ": need one caption or one per frame");
    }
    for (std::size_t f = 0; f < clip.frames.size(); ++f) {
      const TokenSeq& frame = clip.frames[f];
      const TokenSeq& caption =
          clip.captions.size() == 1 ? clip.captions[0] : clip.captions[f];
      if (frame.empty()) throw InvalidArgument("frame with no tokens");
      if (caption.empty()) throw InvalidArgument("caption with no tokens");

      out.layout.spans.push_back(
          Span{SpanKind::kFrame, clip.clip_id, ord, false, pos, pos + frame.size()});
      pos += frame.size();
      for (TokenId id : frame) out.tokens.push_back(Token{id, TokenKind::kFrame});

      const bool last = f + 1 == clip.frames.size();
      out.layout.spans.push_back(Span{SpanKind::kCaption, clip.clip_id, ord, last,
                                      pos, pos + caption.size()});
      pos += caption.size();
      for (TokenId id : caption) out.tokens.push_back(Token{id, TokenKind::kText});
    }
  }
  return out;
}

SequenceLayout layout_from_context(const ContextBuffer& ctx) {
  SequenceLayout layout;
  std::size_t pos = 0;
  std::size_t ord = 0;
  for (const ContextBlock& b : ctx.blocks()) {
    const auto id = static_cast<ClipId>(ord);
    if (b.is_frame()) {
      layout.spans.push_back(
          Span{SpanKind::kFrame, id, ord, false, pos, pos + b.size()});
    } else {
      layout.spans.push_back(
          Span{SpanKind::kCaption, id, ord, true, pos, pos + b.size()});
      ++ord;
    }
    pos += b.size();
  }
  return layout;
}

AttentionMask build_scam_mask(const SequenceLayout& layout) {
  const std::size_t n = layout.size();
  const std::vector<std::uint32_t> owner = span_index(layout);
  const auto& spans = layout.spans;
  AttentionMask mask(n);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t qi = 0; qi < static_cast<std::int64_t>(n); ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    const std::size_t own = owner[q];
    const std::size_t clip = spans[own].clip_ordinal;
    for (std::size_t s = 0; s <= own; ++s) {
      const Span& span = spans[s];
      const bool visible =
          span.kind == SpanKind::kFrame || s == own ||
          (span.clip_final && span.clip_ordinal < clip);
      if (visible) mask.set_range(q, span.begin, std::min(span.end, q + 1));
    }
  }
  return mask;
}

LossMask build_loss_mask(const SequenceLayout& layout) {
  LossMask out(layout.size(), false);
  for (const Span& s : layout.spans) {
    if (!s.is_caption()) continue;
    for (std::size_t p = s.begin; p < s.end; ++p) out[p] = true;
  }
  return out;
}

}  // namespace streamgate
