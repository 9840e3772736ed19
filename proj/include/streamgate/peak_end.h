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

// Peak-end memory compression: probabilistic pruning of old frames.
//
// A frame older than the window W (in frames) is deleted with probability
//
//   p = p_max * rel * min(1, (age - W) / W)
//   rel = (ppl - clip_min) / (clip_max - clip_min + 1e-9)
//
// where ppl is the caption perplexity recorded when the frame was ingested
// and clip_min/clip_max range over the live frames of its clip. Keyframes
// (lowest ppl of each completed clip) are protected; captions are never
// pruned.

#ifndef STREAMGATE_PEAK_END_H_
#define STREAMGATE_PEAK_END_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "streamgate/rng.h"
#include "streamgate/types.h"

namespace streamgate {

struct MemoryRecord {
  BlockId block_id = 0;
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  // Ordinal of the decoded clip the frame belongs to.
  std::size_t clip = 0;
  double frame_ppl = 1.0;
  bool is_protected = false;

  friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct PeakEndConfig {
  int window_frames = 40;
  double fps = 3.0;
  double p_max = 0.9;
};

struct PplRange {
  double min = 0.0;
  double max = 0.0;
};

// Throws InvalidArgument unless fps > 0, W >= 1 and p_max in [0, 1].
void validate(const PeakEndConfig& config);

std::map<std::size_t, PplRange> clip_ppl_ranges(std::span<const MemoryRecord> records);

double deletion_probability(const MemoryRecord& record, const PplRange& clip,
                            double now_s, const PeakEndConfig& config);

// Flags the lowest-ppl frame (earliest on ties) of every clip whose ordinal
// is below `open_clip`.
void protect_keyframes(std::vector<MemoryRecord>& records, std::size_t open_clip);

struct PruneResult {
  ContextBuffer ctx;
  std::vector<BlockId> deleted;
  std::vector<std::int64_t> deleted_frames;
};

// Visits records in ascending timestamp, drawing one uniform per record and
// deleting the frame when the draw falls below its deletion probability.
// Surviving blocks keep their relative order. Records must cover every frame
// block of `ctx`.
PruneResult prune(const ContextBuffer& ctx, std::span<const MemoryRecord> records,
                  const PeakEndConfig& config, Rng& rng, double now_s);

// Per-record survival frequency over `trials` independent prune passes, each
// seeded from (seed, trial index). OpenMP over trials;
// reference::prune_survival is the serial twin.
std::vector<double> prune_survival(const ContextBuffer& ctx,
                                   std::span<const MemoryRecord> records,
                                   const PeakEndConfig& config, double now_s,
                                   std::uint64_t seed, std::int64_t trials);

// Seed of trial `trial` in prune_survival.
inline std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
  return mix64(seed ^ mix64(static_cast<std::uint64_t>(trial)));
}

}  // namespace streamgate

#endif  // STREAMGATE_PEAK_END_H_
