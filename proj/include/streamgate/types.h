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

// Core value types shared by every module: tokens, context blocks, the
// context buffer, ground-truth clips and response logs.

#ifndef STREAMGATE_TYPES_H_
#define STREAMGATE_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace streamgate {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;
using BlockId = std::uint64_t;
using ClipId = std::uint32_t;

// Absolute tolerance for every timestamp comparison, in seconds.
inline constexpr double kTimeEpsilon = 1e-6;

inline constexpr int kDefaultTokensPerFrame = 16;
inline constexpr std::size_t kDefaultContextBudget = 8192;

enum class TokenKind : std::uint8_t { kFrame, kText };

struct Token {
  TokenId id = 0;
  TokenKind kind = TokenKind::kText;

  friend bool operator==(const Token&, const Token&) = default;
};

// One ingested video frame. Every token is a frame token; the block type
// carries the kind so the ids are stored bare.
struct FrameBlock {
  double timestamp_s = 0.0;
  std::int64_t frame_index = 0;
  TokenSeq tokens;

  friend bool operator==(const FrameBlock&, const FrameBlock&) = default;
};

// One emitted caption. `emitted_at_s` is the timestamp of the frame that
// triggered the decode.
struct CaptionBlock {
  TokenSeq tokens;
  double emitted_at_s = 0.0;
  std::optional<ClipId> clip_hint;

  friend bool operator==(const CaptionBlock&, const CaptionBlock&) = default;
};

struct ContextBlock {
  BlockId id = 0;
  std::variant<FrameBlock, CaptionBlock> body;

  bool is_frame() const { return std::holds_alternative<FrameBlock>(body); }
  bool is_caption() const { return !is_frame(); }
  const FrameBlock& frame() const { return std::get<FrameBlock>(body); }
  const CaptionBlock& caption() const { return std::get<CaptionBlock>(body); }
  const TokenSeq& tokens() const;
  std::size_t size() const { return tokens().size(); }
  TokenKind kind() const {
    return is_frame() ? TokenKind::kFrame : TokenKind::kText;
  }

  friend bool operator==(const ContextBlock&, const ContextBlock&) = default;
};

// Ordered blocks forming the model context. Block order is the positional
// order used for scoring and caching. The flattened token count never
// exceeds the budget.
class ContextBuffer {
 public:
  explicit ContextBuffer(std::size_t budget = kDefaultContextBudget);

  // Appends a block and returns its fresh id. Throws BudgetExceeded and leaves
  // the buffer untouched if the block does not fit.
  BlockId append(FrameBlock frame);
  BlockId append(CaptionBlock caption);

  // Exchanges the last two blocks. Throws InvariantError with fewer than two.
  void swap_tail();

  // Removes the given blocks, preserving the relative order of survivors.
  // Unknown ids throw InvalidArgument and leave the buffer untouched.
  void remove(std::span<const BlockId> ids);

  const std::vector<ContextBlock>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }
  std::size_t block_count() const { return blocks_.size(); }
  std::size_t token_count() const { return token_count_; }
  std::size_t budget() const { return budget_; }
  const ContextBlock& back() const { return blocks_.back(); }

  // Index of the block with `id`, or nullopt.
  std::optional<std::size_t> find(BlockId id) const;

  // Flattened token ids in block order.
  TokenSeq ids() const;
  // Same, omitting the last `skip_tail` blocks.
  TokenSeq ids_prefix(std::size_t skip_tail) const;
  std::vector<Token> tokens() const;

  friend bool operator==(const ContextBuffer&, const ContextBuffer&) = default;

 private:
  BlockId push(ContextBlock block);

  std::vector<ContextBlock> blocks_;
  std::size_t token_count_ = 0;
  std::size_t budget_;
  BlockId next_id_ = 1;
};

// Ground-truth semantic clip [t_start, t_end) with its response anchor.
struct SemanticClip {
  ClipId clip_id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double anchor_s = 0.0;
  std::vector<std::string> caption_pool;

  double duration() const { return t_end - t_start; }
  // Half-open membership with the shared timestamp tolerance.
  bool contains(double t) const {
    return t >= t_start - kTimeEpsilon && t < t_end - kTimeEpsilon;
  }

  friend bool operator==(const SemanticClip&, const SemanticClip&) = default;
};

struct Timeline {
  std::vector<SemanticClip> clips;

  bool empty() const { return clips.empty(); }
  std::size_t size() const { return clips.size(); }

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

enum class ResponseKind : std::uint8_t { kInitial, kRedecode };

struct ResponseEntry {
  double t = 0.0;
  std::int64_t frame_index = 0;
  ResponseKind kind = ResponseKind::kInitial;
  TokenSeq tokens;
  double ppl = 0.0;

  friend bool operator==(const ResponseEntry&, const ResponseEntry&) = default;
};

using ResponseLog = std::vector<ResponseEntry>;

// Response timestamps only, the input of the timing metrics.
std::vector<double> response_times(const ResponseLog& log);

}  // namespace streamgate

#endif  // STREAMGATE_TYPES_H_
