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

// Interleaved frame/caption training sequences and their streaming causal
// attention masks.
//
// A sequence is a run of turns, each a frame followed by a caption of that
// frame's clip. The mask is the causal mask with caption keys removed unless
// they are either the last caption of an earlier clip or the query's own
// caption span:
//
//   query q in clip c, key k <= q
//     k in a frame span                         -> visible
//     k in a caption span of clip c' < c        -> visible iff clip-final
//     k in a caption span of clip c             -> visible iff it is q's span
//
// Frame queries follow the same rule as caption queries of their clip. A
// clip's own final caption stays hidden from the rest of that clip.

#ifndef STREAMGATE_SCAM_H_
#define STREAMGATE_SCAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "streamgate/error.h"
#include "streamgate/rng.h"
#include "streamgate/types.h"

namespace streamgate {

enum class SpanKind : std::uint8_t { kFrame, kCaption };

struct Span {
  SpanKind kind = SpanKind::kFrame;
  ClipId clip_id = 0;
  // Position of the clip within the sequence; drives "preceding clip".
  std::size_t clip_ordinal = 0;
  bool clip_final = false;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool is_caption() const { return kind == SpanKind::kCaption; }

  friend bool operator==(const Span&, const Span&) = default;
};

struct SequenceLayout {
  std::vector<Span> spans;

  std::size_t size() const { return spans.empty() ? 0 : spans.back().end; }

  friend bool operator==(const SequenceLayout&, const SequenceLayout&) = default;
};

// Checks contiguity, monotone clip ordinals and the one-final-caption-per-clip
// rule. The last clip may be open (frames with no caption yet). Throws
// InvalidArgument.
void validate_layout(const SequenceLayout& layout);

// Span index for every position.
std::vector<std::uint32_t> span_index(const SequenceLayout& layout);

// Boolean n x n matrix; allowed(q, k) means query q may attend key k. Stored
// dense up to kDenseLimit positions and as 64-bit row bitsets above.
class AttentionMask {
 public:
  static constexpr std::size_t kDenseLimit = 4096;

  AttentionMask() = default;
  explicit AttentionMask(std::size_t n);

  // Plain lower-triangular mask.
  static AttentionMask causal(std::size_t n);

  std::size_t size() const { return n_; }
  bool dense() const { return n_ <= kDenseLimit; }

  bool allowed(std::size_t q, std::size_t k) const {
    if (dense()) return cells_[q * n_ + k] != 0;
    return (bits_[q * words_ + k / 64] >> (k % 64)) & 1u;
  }
  // Rows are independent, so distinct rows may be written concurrently.
  void set(std::size_t q, std::size_t k, bool v);
  void set_range(std::size_t q, std::size_t begin, std::size_t end);

  // Row-major bitstream: bit (q * n + k) lives in byte (q * n + k) / 8 at bit
  // position (q * n + k) % 8.
  std::vector<std::uint8_t> pack_bits() const;

  friend bool operator==(const AttentionMask& a, const AttentionMask& b);

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<std::uint64_t> bits_;
};

// Per-position flag, true where the training loss is computed.
using LossMask = std::vector<bool>;

// Uniform draw from a non-empty pool. A single-element pool is returned
// without consuming randomness.
template <typename T>
const T& sample_caption(std::span<const T> pool, Rng& rng) {
  if (pool.empty()) throw InvalidArgument("sample_caption: empty pool");
  if (pool.size() == 1) return pool.front();
  return pool[rng.below(pool.size())];
}

// Input for one clip: its frames and the caption carried by each frame turn.
// `captions` holds one entry per frame, or a single entry reused for every
// turn.
struct ClipTurns {
  ClipId clip_id = 0;
  std::vector<TokenSeq> frames;
  std::vector<TokenSeq> captions;
};

struct InterleavedSequence {
  std::vector<Token> tokens;
  SequenceLayout layout;
};

InterleavedSequence build_interleaved_sequence(std::span<const ClipTurns> clips);

// Layout of an inference context: every caption closes the clip made of the
// frames before it; trailing frames form an open clip.
SequenceLayout layout_from_context(const ContextBuffer& ctx);

// Row-parallel construction (OpenMP). reference::build_scam_mask is the serial
// per-cell version kept for testing.
AttentionMask build_scam_mask(const SequenceLayout& layout);

LossMask build_loss_mask(const SequenceLayout& layout);

}  // namespace streamgate

#endif  // STREAMGATE_SCAM_H_
