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

#include "streamgate/types.h"

#include <algorithm>
#include <unordered_set>
#include <utility>

#include "streamgate/error.h"

namespace streamgate {

const TokenSeq& ContextBlock::tokens() const {
  return is_frame() ? frame().tokens : caption().tokens;
}

ContextBuffer::ContextBuffer(std::size_t budget) : budget_(budget) {}

BlockId ContextBuffer::push(ContextBlock block) {
  const std::size_t needed = token_count_ + block.size();
  if (needed > budget_) throw BudgetExceeded(needed, budget_);
  block.id = next_id_++;
  token_count_ = needed;
  blocks_.push_back(std::move(block));
  return blocks_.back().id;
}

BlockId ContextBuffer::append(FrameBlock frame) {
  return push(ContextBlock{0, std::move(frame)});
}

BlockId ContextBuffer::append(CaptionBlock caption) {
  return push(ContextBlock{0, std::move(caption)});
}

void ContextBuffer::swap_tail() {
  if (blocks_.size() < 2) {
    throw InvariantError("swap_tail needs at least two blocks");
  }
  std::swap(blocks_[blocks_.size() - 1], blocks_[blocks_.size() - 2]);
}

std::optional<std::size_t> ContextBuffer::find(BlockId id) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].id == id) return i;
  }
  return std::nullopt;
}

void ContextBuffer::remove(std::span<const BlockId> ids) {
  std::unordered_set<BlockId> doomed(ids.begin(), ids.end());
  for (BlockId id : doomed) {
    if (!find(id)) {
      throw InvalidArgument("remove: unknown block id " + std::to_string(id));
    }
  }
  std::size_t removed_tokens = 0;
  std::erase_if(blocks_, [&](const ContextBlock& b) {
    if (!doomed.contains(b.id)) return false;
    removed_tokens += b.size();
    return true;
  });
  token_count_ -= removed_tokens;
}

TokenSeq ContextBuffer::ids_prefix(std::size_t skip_tail) const {
  TokenSeq out;
  const std::size_t end =
      skip_tail >= blocks_.size() ? 0 : blocks_.size() - skip_tail;
  std::size_t n = 0;
  for (std::size_t i = 0; i < end; ++i) n += blocks_[i].size();
  out.reserve(n);
  for (std::size_t i = 0; i < end; ++i) {
    const TokenSeq& t = blocks_[i].tokens();
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

TokenSeq ContextBuffer::ids() const { return ids_prefix(0); }

std::vector<Token> ContextBuffer::tokens() const {
  std::vector<Token> out;
  out.reserve(token_count_);
  for (const ContextBlock& b : blocks_) {
    for (TokenId id : b.tokens()) out.push_back(Token{id, b.kind()});
  }
  return out;
}

std::vector<double> response_times(const ResponseLog& log) {
  std::vector<double> out;
  out.reserve(log.size());
  for (const ResponseEntry& r : log) out.push_back(r.t);
  return out;
}

}  // namespace streamgate
