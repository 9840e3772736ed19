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

#include "streamgate/streaming_cache.h"

#include <algorithm>
#include <unordered_set>

#include "streamgate/error.h"
#include "streamgate/fingerprint.h"
#include "streamgate/scorer.h"

namespace streamgate {
namespace {

// Reassigns ranges from entry `from` onward by length bookkeeping.
void relayout(std::vector<CacheEntry>& entries, std::size_t from) {
  std::size_t pos = from == 0 ? 0 : entries[from - 1].end;
  for (std::size_t i = from; i < entries.size(); ++i) {
    const std::size_t len = entries[i].size();
    entries[i].begin = pos;
    entries[i].end = pos + len;
    pos += len;
  }
}

}  // namespace

std::uint64_t recompute_payload(const ContextBuffer& ctx, std::size_t index,
                                const Scorer& scorer) {
  std::uint64_t h = kFnvOffset;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < index; ++i) {
    h = fingerprint(ctx.blocks()[i].tokens(), h);
    begin += ctx.blocks()[i].size();
  }
  h = fingerprint(ctx.blocks()[index].tokens(), h);
  return scorer.state_checksum(h, begin);
}

void StreamingCache::append(BlockId id, std::size_t length,
                            std::optional<std::uint64_t> payload) {
  for (const CacheEntry& e : entries_) {
    if (e.block_id == id) {
      throw InvariantError("cache: block " + std::to_string(id) +
                           " appended twice");
    }
  }
  const std::size_t begin = token_count();
  entries_.push_back(CacheEntry{id, begin, begin + length, payload,
                                CacheLevel::kIntraDialogue});
}

void StreamingCache::swap_tail() {
  if (entries_.size() < 2) {
    throw InvariantError("cache: swap_tail needs at least two entries");
  }
  const std::size_t n = entries_.size();
  std::swap(entries_[n - 2], entries_[n - 1]);
  relayout(entries_, n - 2);
  entries_[n - 2].payload.reset();
  entries_[n - 1].payload.reset();
}

void StreamingCache::prune(std::span<const BlockId> ids) {
  if (ids.empty()) return;
  std::unordered_set<BlockId> doomed(ids.begin(), ids.end());
  for (BlockId id : doomed) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [id](const CacheEntry& e) { return e.block_id == id; });
    if (it == entries_.end()) {
      throw InvalidArgument("cache: prune of unknown block " + std::to_string(id));
    }
    if (it + 1 == entries_.end()) {
      throw InvalidArgument("cache: the tail entry cannot be pruned");
    }
  }
  std::size_t first = entries_.size();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (doomed.contains(entries_[i].block_id)) {
      first = i;
      break;
    }
  }
  std::erase_if(entries_,
                [&](const CacheEntry& e) { return doomed.contains(e.block_id); });
  relayout(entries_, first);
  for (std::size_t i = first; i < entries_.size(); ++i) entries_[i].payload.reset();
}

void StreamingCache::promote_to_inter() {
  for (CacheEntry& e : entries_) e.level = CacheLevel::kInterDialogue;
}

void StreamingCache::reset_intra() {
  for (CacheEntry& e : entries_) {
    if (e.level == CacheLevel::kIntraDialogue) e.payload.reset();
  }
}

std::size_t StreamingCache::serve(const ContextBuffer& ctx, std::size_t blocks,
                                  std::size_t continuation_len,
                                  const Scorer& scorer) {
  if (blocks > entries_.size() || blocks > ctx.block_count()) {
    throw InvariantError("cache: scorer call reads past the cached blocks");
  }
  std::uint64_t h = kFnvOffset;
  std::size_t served = 0;
  std::size_t context_len = 0;
  bool recomputing = false;
  for (std::size_t i = 0; i < blocks; ++i) {
    const ContextBlock& block = ctx.blocks()[i];
    CacheEntry& e = entries_[i];
    if (e.block_id != block.id || e.size() != block.size()) {
      throw InvariantError("cache: entry " + std::to_string(i) +
                           " does not mirror context block " +
                           std::to_string(block.id));
    }
    h = fingerprint(block.tokens(), h);
    context_len += block.size();
    // Attention state depends on every earlier position: after the first
    // recomputed block nothing later can be reused.
    if (e.fresh() && !recomputing) {
      served += e.size();
    } else {
      recomputing = true;
      e.payload = scorer.state_checksum(h, e.begin);
    }
  }
  stats_.tokens_scored_total += context_len + continuation_len;
  stats_.tokens_served_from_cache += served;
  return served;
}

void StreamingCache::refresh(const ContextBuffer& ctx, std::size_t index,
                             const Scorer& scorer) {
  if (index >= entries_.size()) throw InvariantError("cache: refresh out of range");
  entries_[index].payload = recompute_payload(ctx, index, scorer);
}

void StreamingCache::count_uncached(std::size_t context_len,
                                    std::size_t continuation_len) {
  stats_.tokens_scored_total += context_len + continuation_len;
}

ConsistencyReport StreamingCache::check(const ContextBuffer& ctx,
                                        const Scorer* scorer) const {
  ConsistencyReport report;
  auto& v = report.violations;
  const auto& blocks = ctx.blocks();
  if (entries_.size() != blocks.size()) {
    v.push_back("entry count " + std::to_string(entries_.size()) +
                " differs from block count " + std::to_string(blocks.size()));
  }
  std::size_t expected = 0;
  for (const CacheEntry& e : entries_) {
    if (e.begin > expected) {
      v.push_back("gap at position " + std::to_string(expected));
    } else if (e.begin < expected) {
      v.push_back("overlap at position " + std::to_string(e.begin));
    }
    expected = e.end;
  }
  if (expected != ctx.token_count()) {
    v.push_back("entries cover " + std::to_string(expected) +
                " tokens, context has " + std::to_string(ctx.token_count()));
  }

  std::uint64_t h = kFnvOffset;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < std::min(entries_.size(), blocks.size()); ++i) {
    const CacheEntry& e = entries_[i];
    const ContextBlock& b = blocks[i];
    h = fingerprint(b.tokens(), h);
    if (e.block_id != b.id) {
      v.push_back("entry " + std::to_string(i) + " holds block " +
                  std::to_string(e.block_id) + ", context has block " +
                  std::to_string(b.id));
    } else if (e.size() != b.size()) {
      v.push_back("entry for block " + std::to_string(b.id) + " spans " +
                  std::to_string(e.size()) + " tokens, block has " +
                  std::to_string(b.size()));
    }
    if (!e.fresh()) {
      v.push_back("stale entry for block " + std::to_string(e.block_id));
    } else if (scorer && *e.payload != scorer->state_checksum(h, pos)) {
      v.push_back("payload mismatch for block " + std::to_string(e.block_id));
    }
    pos += b.size();
  }
  return report;
}

}  // namespace streamgate
