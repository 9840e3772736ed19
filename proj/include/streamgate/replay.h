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

// End-to-end replay of a trace through the gate, memory compression and
// cache, plus the metric report and parameter sweeps.

#ifndef STREAMGATE_REPLAY_H_
#define STREAMGATE_REPLAY_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamgate/judge.h"
#include "streamgate/metrics.h"
#include "streamgate/scorer.h"
#include "streamgate/streaming_cache.h"
#include "streamgate/sved.h"
#include "streamgate/trace.h"

namespace streamgate {

struct RunConfig {
  double alpha = kDefaultAlpha;
  int window_frames = 40;
  int pool_size = 1;
  int tokens_per_frame = kDefaultTokensPerFrame;
  double fps = 3.0;
  std::size_t context_budget = kDefaultContextBudget;
  // "reference:PATH", "reference:auto" (PATH = trace with .scenario.json in
  // place of its extension) or "bridge:ENDPOINT".
  std::string scorer = "reference:auto";
  std::uint64_t seed = 0;
  int max_generation_len = 32;
  bool use_cache = true;
  bool scam_at_inference = false;
  DiffReference diff_reference = DiffReference::kAnchor;
};

// Throws InvalidArgument.
void validate(const RunConfig& config);

std::filesystem::path auto_scenario_path(const std::filesystem::path& trace_path);

// Throws InvalidArgument for an unknown spec and ScorerError when the scorer
// cannot be loaded or reached.
std::unique_ptr<Scorer> make_scorer(const RunConfig& config,
                                    const std::filesystem::path& trace_path);

struct SceneJudgement {
  ClipId clip_id = 0;
  std::optional<JudgeScores> semcor;
};

struct RunResult {
  // NDJSON event records in emission order.
  std::vector<std::string> events;
  std::vector<GateDecision> decisions;
  std::vector<PruneEvent> prunes;
  ResponseLog responses;
  std::optional<TimingScores> timing;
  std::optional<double> tok_acc;
  std::string judge_name;
  std::vector<SceneJudgement> semcor;
  std::optional<JudgeScores> sumfluen;
  CacheStats cache;
  std::size_t frames = 0;
};

// Runs a session over every frame of `trace`. On BudgetExceeded the context
// is pruned once (pruning sub-stream of the seed) and the frame retried; a
// second overflow throws InvariantError.
RunResult run_session(const RunConfig& config, const Trace& trace, Scorer& scorer,
                      Judge& judge);

// Teacher-forced next-token accuracy over the tokenized reference captions,
// each conditioned on its clip's frames up to the anchor. nullopt when the
// trace carries no tokenized captions.
std::optional<double> teacher_forced_accuracy(const Trace& trace, Scorer& scorer);

std::string report_json(const RunConfig& config, const RunResult& result);
std::string per_scene_csv(const RunResult& result);
std::string responses_ndjson(const RunResult& result);

// Writes events.ndjson, responses.ndjson, report.json and per_scene.csv.
void write_artifacts(const RunConfig& config, const RunResult& result,
                     const std::filesystem::path& out_dir);

RunResult run_replay(const RunConfig& config, const std::filesystem::path& trace_path,
                     const std::filesystem::path& out_dir);

struct SweepGrid {
  std::vector<double> alphas;
  std::vector<int> windows;
  std::vector<std::filesystem::path> traces;
};

struct SweepRow {
  std::string trace;
  double alpha = 0.0;
  int window_frames = 0;
  bool ok = false;
  std::string error;
  std::size_t frames = 0;
  std::size_t responses = 0;
  std::size_t prunes = 0;
  std::optional<double> tim_diff;
  std::optional<double> tim_redun;
  std::optional<double> tim_cover;
  std::optional<double> tok_acc;
  double recompute_ratio = 1.0;
};

// One row per (trace, alpha, window) in that nesting order. Runs execute in
// parallel on up to `jobs` threads; a failing run is recorded in its row.
// Throws InvalidArgument on an empty grid or trace set.
std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, int jobs = 1);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace streamgate

#endif  // STREAMGATE_REPLAY_H_
