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

// Ledger model of a two-level streaming key/value cache.
//
// One entry per context block, in context order, holding the block's flat
// position range and an opaque payload standing in for its cached state.
// Any operation that moves a block invalidates its payload (and, because
// attention state depends on every earlier position, the payloads of all
// blocks after it); stale payloads are recomputed by the next scorer call
// that reads them.
//
// Levels: entries start as intra-dialogue (frame-level state of the current
// turn) and are promoted to inter-dialogue (long-context history) when a
// caption decode closes the turn. reset_intra() discards only intra-level
// payloads.

#ifndef STREAMGATE_STREAMING_CACHE_H_
#define STREAMGATE_STREAMING_CACHE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamgate/types.h"

namespace streamgate {

class Scorer;

enum class CacheLevel : std::uint8_t { kIntraDialogue, kInterDialogue };

struct CacheEntry {
  BlockId block_id = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  // nullopt marks a stale payload.
  std::optional<std::uint64_t> payload;
  CacheLevel level = CacheLevel::kIntraDialogue;

  std::size_t size() const { return end - begin; }
  bool fresh() const { return payload.has_value(); }

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

struct CacheStats {
  // Tokens an uncached model would process across all scorer calls.
  std::uint64_t tokens_scored_total = 0;
  std::uint64_t tokens_served_from_cache = 0;

  std::uint64_t tokens_recomputed() const {
    return tokens_scored_total - tokens_served_from_cache;
  }
  // Fraction of scored tokens that had to be computed; 1.0 without caching.
  double recompute_ratio() const {
    return tokens_scored_total == 0
               ? 1.0
               : static_cast<double>(tokens_recomputed()) /
                     static_cast<double>(tokens_scored_total);
  }

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

struct ConsistencyReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

class StreamingCache {
 public:
  StreamingCache() = default;

  // Appends an entry for the new tail block at the next free range. A
  // repeated block id is internal corruption and throws InvariantError.
  void append(BlockId id, std::size_t length,
              std::optional<std::uint64_t> payload = std::nullopt);

  // Exchanges the last two entries, recomputing both ranges by length and
  // marking both stale. Throws InvariantError with fewer than two entries.
  void swap_tail();

  // Removes entries, shifts the survivors left and marks every shifted entry
  // stale. Unknown ids or the tail entry throw InvalidArgument and leave the
  // cache untouched.
  void prune(std::span<const BlockId> ids);

  void promote_to_inter();
  void reset_intra();

  // Accounts for one scorer call that reads the first `blocks` entries as
  // context followed by `continuation_len` new tokens. Stale entries among
  // them are recomputed through `scorer` first, so only fresh payloads are
  // ever served. Returns the number of tokens served from cache.
  std::size_t serve(const ContextBuffer& ctx, std::size_t blocks,
                    std::size_t continuation_len, const Scorer& scorer);

  // Sets the payload of entry `index` from the scorer after a pass that
  // computed it anyway (a scored continuation or a generated caption).
  void refresh(const ContextBuffer& ctx, std::size_t index, const Scorer& scorer);

  // Bijection with `ctx`, contiguity, coverage, staleness and, when `scorer`
  // is given, payload checksums against a from-scratch recomputation.
  ConsistencyReport check(const ContextBuffer& ctx, const Scorer* scorer) const;

  const std::vector<CacheEntry>& entries() const { return entries_; }
  // Direct access, for diagnostics and fault-injection tests.
  std::vector<CacheEntry>& mutable_entries() { return entries_; }
  std::size_t token_count() const {
    return entries_.empty() ? 0 : entries_.back().end;
  }
  const CacheStats& stats() const { return stats_; }
  // Records a scorer call made with caching disabled.
  void count_uncached(std::size_t context_len, std::size_t continuation_len);

  friend bool operator==(const StreamingCache&, const StreamingCache&) = default;

 private:
  std::vector<CacheEntry> entries_;
  CacheStats stats_;
};

// Checksum the reference scorer would produce for block `index` of `ctx`.
std::uint64_t recompute_payload(const ContextBuffer& ctx, std::size_t index,
                                const Scorer& scorer);

}  // namespace streamgate

#endif  // STREAMGATE_STREAMING_CACHE_H_
