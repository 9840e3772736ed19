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

// Streaming verification decoding: the per-frame response/silence gate.
//
// For each incoming frame:
//   - append the frame to the context;
//   - with no caption yet, generate one (initial decode);
//   - otherwise score the current caption placed right after the new frame.
//     If its perplexity exceeds alpha times the perplexity it had when it
//     was decoded, generate a new caption from the context and append it
//     (redecode); else move the caption behind the frame and stay silent.
//
// The silent path commits exactly the placement the verification pass
// scored. On redecode the old caption stays where it was, ahead of the new
// frame, as the closing caption of the previous clip.

#ifndef STREAMGATE_SVED_H_
#define STREAMGATE_SVED_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamgate/peak_end.h"
#include "streamgate/scorer.h"
#include "streamgate/streaming_cache.h"
#include "streamgate/types.h"

namespace streamgate {

inline constexpr double kDefaultAlpha = 1.03;

struct SvedConfig {
  double alpha = kDefaultAlpha;
  int tokens_per_frame = kDefaultTokensPerFrame;
  std::size_t context_budget = kDefaultContextBudget;
  // Also the room kept free in the budget for the next caption.
  int max_generation_len = 32;
  bool use_cache = true;
  // Pass a streaming causal mask built from the context to the scorer
  // instead of the plain causal default.
  bool scam_at_inference = false;
};

// Throws InvalidArgument (alpha < 1, non-positive sizes, ...).
void validate(const SvedConfig& config);

enum class DecisionKind : std::uint8_t { kInitialDecode, kRedecode, kSilent };

const char* decision_name(DecisionKind kind);

struct GateDecision {
  DecisionKind kind = DecisionKind::kSilent;
  double t = 0.0;
  std::int64_t frame_index = 0;
  // Present iff kind != kSilent.
  std::optional<TokenSeq> emitted;
  // Present iff a verification pass ran.
  std::optional<double> verify_ppl;
  std::optional<double> threshold;
  // Reference perplexity after the decision.
  std::optional<double> ref_ppl;
  // The scorer produced an empty caption; treated as silence.
  bool empty_generation = false;

  friend bool operator==(const GateDecision&, const GateDecision&) = default;
};

struct PruneEvent {
  double t = 0.0;
  std::vector<std::int64_t> pruned_frames;
  std::size_t survivor_tokens = 0;

  friend bool operator==(const PruneEvent&, const PruneEvent&) = default;
};

// Complete per-session state. A value type: ingest_frame consumes one state
// and returns the next.
struct SvedState {
  SvedConfig config;
  ContextBuffer ctx;
  // The current caption [Dec] and its block in ctx.
  std::optional<CaptionBlock> dec;
  std::optional<BlockId> dec_block;
  std::optional<double> ref_ppl;
  double ref_time_s = 0.0;

  std::optional<double> last_frame_s;
  // Ordinal of the clip the next frame joins; a redecode opens a new one.
  std::size_t open_clip = 0;
  std::vector<MemoryRecord> memory;
  StreamingCache cache;
  ResponseLog responses;
};

SvedState init_session(const SvedConfig& config);

// One gate step. `state` is taken by value, so a thrown error (scorer
// failure, BudgetExceeded, bad frame) leaves the caller's state untouched.
std::pair<SvedState, GateDecision> ingest_frame(SvedState state,
                                                const FrameBlock& frame,
                                                Scorer& scorer);

// Peak-end prune of the session's context, memory records and cache.
PruneEvent apply_prune(SvedState& state, const PeakEndConfig& config, Rng& rng,
                       double now_s);

ResponseLog finalize_session(const SvedState& state);

// NDJSON event records.
std::string to_json_line(const GateDecision& d);
std::string to_json_line(const PruneEvent& e);

// Mutable wrapper for callers that do not need value semantics.
class SvedSession {
 public:
  explicit SvedSession(const SvedConfig& config) : state_(init_session(config)) {}

  const GateDecision& ingest(const FrameBlock& frame, Scorer& scorer);
  PruneEvent prune(const PeakEndConfig& config, Rng& rng, double now_s) {
    return apply_prune(state_, config, rng, now_s);
  }

  const SvedState& state() const { return state_; }
  const std::vector<GateDecision>& decisions() const { return decisions_; }
  ResponseLog finalize() const { return finalize_session(state_); }

 private:
  SvedState state_;
  std::vector<GateDecision> decisions_;
};

}  // namespace streamgate

#endif  // STREAMGATE_SVED_H_
