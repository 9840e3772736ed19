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

// Scripted streams: a trace together with a table-scorer scenario whose
// perplexities follow the scene structure of the trace.
//
// Scene k has caption c_k (caption_len distinct tokens) and frames drawn
// from `variants` frame tokens f_{k,v}; every frame block repeats its token
// tokens_per_frame times. After a frame f_{k,v} the scenario scores caption
// c_j, for lags d = k - j in [0, lag_factors.size()], with per-token
// probability
//
//   q(v) / g(d),   q(v) = in_prob - v * variant_step,  g(0) = 1,
//   g(d) = lag_factors[d - 1].
//
// Greedy generation after any frame of scene k therefore yields c_k, and a
// caption decoded d scenes ago verifies at perplexity g(d) / q(v). Older
// captions fall back to the uniform distribution.

#ifndef STREAMGATE_SYNTH_H_
#define STREAMGATE_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "streamgate/rng.h"
#include "streamgate/table_scorer.h"
#include "streamgate/trace.h"

namespace streamgate {

struct ScriptConfig {
  std::vector<int> scene_frames;
  double fps = 3.0;
  double t0 = 0.0;
  int tokens_per_frame = kDefaultTokensPerFrame;
  int caption_len = 2;
  int variants = 1;
  double in_prob = 0.9;
  double variant_step = 0.0;
  std::vector<double> lag_factors = {1.8};
  int max_generation_len = 32;
  std::size_t context_limit = kDefaultContextBudget;
};

struct ScriptedStream {
  Trace trace;
  Scenario scenario;
};

// Throws InvalidArgument on an empty scene list, non-positive sizes,
// probabilities outside (0, 1] or lag factors that are below 1 or not
// increasing.
ScriptedStream make_scripted_stream(const ScriptConfig& config);

TokenId frame_token(const ScriptConfig& config, int scene, int variant);
TokenSeq caption_tokens(const ScriptConfig& config, int scene);

// Two scenes of `frames_per_scene` frames, in-scene probability 0.9 and
// boundary probability 0.5.
ScriptConfig two_clip_config(int frames_per_scene = 5);

// Single-variant stream with random scene lengths and random increasing lag
// factors in (1, 1.2).
ScriptConfig random_monotone_config(Rng& rng);

// `frames` frames at 3 fps in scenes of 20-60 frames, 16 frame variants.
ScriptConfig long_stream_config(std::uint64_t seed, int frames = 1800);

// Writes <dir>/<stem>.ndjson and <dir>/<stem>.scenario.json.
void write_scripted_stream(const ScriptedStream& stream,
                           const std::filesystem::path& dir, const std::string& stem);

}  // namespace streamgate

#endif  // STREAMGATE_SYNTH_H_
