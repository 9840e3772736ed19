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

#include "streamgate/sved.h"

#include <cmath>

#include "json.hpp"
#include "streamgate/error.h"
#include "streamgate/log.h"
#include "streamgate/scam.h"

namespace streamgate {
namespace {

// Scorer access for one ingest step: cache accounting, the optional
// inference mask and frame-tagged error reporting.
class StepScorer {
 public:
  StepScorer(SvedState& s, Scorer& scorer, std::int64_t frame_index)
      : s_(s), scorer_(scorer), frame_index_(frame_index) {}

  // Scores the tail block as a continuation of every block before it.
  double verify_tail() {
    const std::size_t n = s_.ctx.block_count();
    const TokenSeq context = s_.ctx.ids_prefix(1);
    const TokenSeq& cont = s_.ctx.back().tokens();
    account(n - 1, cont.size());
    const AttentionMask mask = inference_mask();
    const ScoreResult r = guarded([&] {
      return scorer_.score(context, cont,
                           s_.config.scam_at_inference ? &mask : nullptr);
    });
    if (r.size() != cont.size()) {
      throw ScorerError("frame " + std::to_string(frame_index_) +
                        ": scorer returned " + std::to_string(r.size()) +
                        " logprobs for " + std::to_string(cont.size()) + " tokens");
    }
    if (s_.config.use_cache) s_.cache.refresh(s_.ctx, n - 1, scorer_);
    return perplexity(r);
  }

  Generation generate() {
    const std::size_t n = s_.ctx.block_count();
    account(n, 0);
    const TokenSeq context = s_.ctx.ids();
    Generation g = guarded(
        [&] { return scorer_.generate(context, s_.config.max_generation_len); });
    if (g.tokens.size() != g.score.size() ||
        g.tokens.size() > static_cast<std::size_t>(s_.config.max_generation_len)) {
      throw ScorerError("frame " + std::to_string(frame_index_) +
                        ": malformed generation");
    }
    // Generated tokens are always computed fresh.
    s_.cache.count_uncached(0, g.tokens.size());
    return g;
  }

 private:
  void account(std::size_t blocks, std::size_t continuation_len) {
    if (s_.config.use_cache) {
      s_.cache.serve(s_.ctx, blocks, continuation_len, scorer_);
    } else {
      std::size_t len = 0;
      for (std::size_t i = 0; i < blocks; ++i) len += s_.ctx.blocks()[i].size();
      s_.cache.count_uncached(len, continuation_len);
    }
  }

  AttentionMask inference_mask() const {
    if (!s_.config.scam_at_inference) return AttentionMask();
    return build_scam_mask(layout_from_context(s_.ctx));
  }

  template <typename F>
  auto guarded(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ContextOverflow& e) {
      throw ContextOverflow("frame " + std::to_string(frame_index_) + ": " + e.what());
    } catch (const ScorerError& e) {
      throw ScorerError("frame " + std::to_string(frame_index_) + ": " + e.what());
    }
  }

  SvedState& s_;
  Scorer& scorer_;
  std::int64_t frame_index_;
};

void swap_tail(SvedState& s) {
  s.ctx.swap_tail();
  if (s.config.use_cache) s.cache.swap_tail();
}

// Appends a freshly generated caption as the new [Dec].
void commit_caption(SvedState& s, const Generation& g, const FrameBlock& frame,
                    const Scorer& scorer) {
  CaptionBlock caption{g.tokens, frame.timestamp_s, s.open_clip};
  const BlockId id = s.ctx.append(caption);
  if (s.config.use_cache) {
    s.cache.append(id, caption.tokens.size());
    s.cache.refresh(s.ctx, s.ctx.block_count() - 1, scorer);
    s.cache.promote_to_inter();
  }
  const double ppl = perplexity(g.score);
  s.dec = std::move(caption);
  s.dec_block = id;
  s.ref_ppl = ppl;
  s.ref_time_s = frame.timestamp_s;
}

}  // namespace

void validate(const SvedConfig& config) {
  if (!(config.alpha >= 1.0) || !std::isfinite(config.alpha)) {
    throw InvalidArgument("alpha must be a finite value >= 1 (got " +
                          std::to_string(config.alpha) + ")");
  }
  if (config.tokens_per_frame < 1) {
    throw InvalidArgument("tokens_per_frame must be positive");
  }
  if (config.max_generation_len < 1) {
    throw InvalidArgument("max_generation_len must be positive");
  }
  if (config.context_budget <
      static_cast<std::size_t>(config.tokens_per_frame + config.max_generation_len)) {
    throw InvalidArgument("context_budget cannot hold one frame and one caption");
  }
}

const char* decision_name(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::kInitialDecode:
      return "initial";
    case DecisionKind::kRedecode:
      return "redecode";
    case DecisionKind::kSilent:
      return "silent";
  }
  return "?";
}

SvedState init_session(const SvedConfig& config) {
  validate(config);
  SvedState s;
  s.config = config;
  s.ctx = ContextBuffer(config.context_budget);
  return s;
}

std::pair<SvedState, GateDecision> ingest_frame(SvedState s, const FrameBlock& frame,
                                                Scorer& scorer) {
  if (frame.tokens.size() != static_cast<std::size_t>(s.config.tokens_per_frame)) {
    throw InvalidArgument("frame " + std::to_string(frame.frame_index) + " has " +
                          std::to_string(frame.tokens.size()) +
                          " tokens, session expects " +
                          std::to_string(s.config.tokens_per_frame));
  }
  if (s.last_frame_s && frame.timestamp_s <= *s.last_frame_s + kTimeEpsilon) {
    throw InvalidArgument("frame " + std::to_string(frame.frame_index) +
                          ": timestamp does not increase");
  }
  const std::size_t needed = s.ctx.token_count() + frame.tokens.size() +
                             static_cast<std::size_t>(s.config.max_generation_len);
  if (needed > s.config.context_budget) {
    throw BudgetExceeded(needed, s.config.context_budget);
  }

  GateDecision d;
  d.t = frame.timestamp_s;
  d.frame_index = frame.frame_index;
  s.last_frame_s = frame.timestamp_s;

  const BlockId frame_id = s.ctx.append(frame);
  if (s.config.use_cache) s.cache.append(frame_id, frame.tokens.size());
  MemoryRecord record{frame_id, frame.frame_index, frame.timestamp_s, s.open_clip,
                      1.0, false};
  StepScorer step(s, scorer, frame.frame_index);

  if (!s.dec) {
    const Generation g = step.generate();
    if (g.tokens.empty()) {
      log().warn("frame {}: empty initial caption, staying silent",
                 frame.frame_index);
      d.kind = DecisionKind::kSilent;
      d.empty_generation = true;
    } else {
      commit_caption(s, g, frame, scorer);
      d.kind = DecisionKind::kInitialDecode;
      d.emitted = g.tokens;
      record.frame_ppl = *s.ref_ppl;
    }
  } else {
    // Place [Dec] right after the new frame and verify it there.
    swap_tail(s);
    const double v = step.verify_tail();
    const double threshold = s.config.alpha * *s.ref_ppl;
    d.verify_ppl = v;
    d.threshold = threshold;
    record.frame_ppl = v;
    d.kind = DecisionKind::kSilent;
    if (v > threshold) {
      // Decode from the context in arrival order: old caption, then frame.
      swap_tail(s);
      const Generation g = step.generate();
      if (g.tokens.empty()) {
        log().warn("frame {}: empty caption on redecode, keeping the current one",
                   frame.frame_index);
        swap_tail(s);
        d.empty_generation = true;
      } else {
        ++s.open_clip;
        record.clip = s.open_clip;
        commit_caption(s, g, frame, scorer);
        protect_keyframes(s.memory, s.open_clip);
        d.kind = DecisionKind::kRedecode;
        d.emitted = g.tokens;
        record.frame_ppl = *s.ref_ppl;
      }
    }
  }

  if (d.emitted) {
    s.responses.push_back(ResponseEntry{
        frame.timestamp_s, frame.frame_index,
        d.kind == DecisionKind::kInitialDecode ? ResponseKind::kInitial
                                               : ResponseKind::kRedecode,
        *d.emitted, *s.ref_ppl});
  }
  s.memory.push_back(record);
  d.ref_ppl = s.ref_ppl;
  return {std::move(s), std::move(d)};
}

PruneEvent apply_prune(SvedState& s, const PeakEndConfig& config, Rng& rng,
                       double now_s) {
  PruneResult r = prune(s.ctx, s.memory, config, rng, now_s);
  if (s.config.use_cache) s.cache.prune(r.deleted);
  s.ctx = std::move(r.ctx);
  std::erase_if(s.memory, [&](const MemoryRecord& m) {
    return std::find(r.deleted.begin(), r.deleted.end(), m.block_id) !=
           r.deleted.end();
  });
  return PruneEvent{now_s, std::move(r.deleted_frames), s.ctx.token_count()};
}

ResponseLog finalize_session(const SvedState& state) { return state.responses; }

std::string to_json_line(const GateDecision& d) {
  nlohmann::ordered_json j;
  j["t"] = d.t;
  j["decision"] = decision_name(d.kind);
  j["verify_ppl"] = d.verify_ppl ? nlohmann::ordered_json(*d.verify_ppl) : nullptr;
  j["threshold"] = d.threshold ? nlohmann::ordered_json(*d.threshold) : nullptr;
  j["ref_ppl"] = d.ref_ppl ? nlohmann::ordered_json(*d.ref_ppl) : nullptr;
  return j.dump();
}

std::string to_json_line(const PruneEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["pruned_frames"] = e.pruned_frames;
  j["survivor_tokens"] = e.survivor_tokens;
  return j.dump();
}

const GateDecision& SvedSession::ingest(const FrameBlock& frame, Scorer& scorer) {
  auto [next, decision] = ingest_frame(state_, frame, scorer);
  state_ = std::move(next);
  decisions_.push_back(std::move(decision));
  return decisions_.back();
}

}  // namespace streamgate
