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

#include "streamgate/synth.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamgate/error.h"

namespace streamgate {
namespace {

void check(const ScriptConfig& c) {
  if (c.scene_frames.empty()) throw InvalidArgument("synth: no scenes");
  for (int n : c.scene_frames) {
    if (n < 1) throw InvalidArgument("synth: scene with no frames");
  }
  if (!(c.fps > 0.0)) throw InvalidArgument("synth: fps must be positive");
  if (c.tokens_per_frame < 1 || c.caption_len < 1 || c.variants < 1) {
    throw InvalidArgument("synth: sizes must be positive");
  }
  const double lowest = c.in_prob - (c.variants - 1) * c.variant_step;
  if (!(c.in_prob <= 1.0) || !(lowest > 0.0) || c.variant_step < 0.0) {
    throw InvalidArgument("synth: frame probabilities must lie in (0, 1]");
  }
  double prev = 1.0;
  for (double g : c.lag_factors) {
    if (!(g > prev)) throw InvalidArgument("synth: lag factors must increase from 1");
    prev = g;
  }
}

std::string render(const TokenSeq& tokens) {
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += std::to_string(t);
  }
  return out;
}

}  // namespace

TokenId frame_token(const ScriptConfig& c, int scene, int variant) {
  return static_cast<TokenId>(scene * c.variants + variant);
}

TokenSeq caption_tokens(const ScriptConfig& c, int scene) {
  const auto base = static_cast<TokenId>(c.scene_frames.size() * c.variants);
  TokenSeq out;
  for (int i = 0; i < c.caption_len; ++i) {
    out.push_back(base + static_cast<TokenId>(scene * c.caption_len + i));
  }
  return out;
}

ScriptedStream make_scripted_stream(const ScriptConfig& c) {
  check(c);
  const int scenes = static_cast<int>(c.scene_frames.size());
  ScriptedStream out;
  Scenario& sc = out.scenario;
  sc.vocabulary_size = static_cast<std::uint64_t>(scenes) *
                       static_cast<std::uint64_t>(c.variants + c.caption_len);
  sc.max_generation_len = c.max_generation_len;
  sc.context_limit = c.context_limit;

  std::int64_t index = 0;
  for (int k = 0; k < scenes; ++k) {
    SemanticClip clip;
    clip.clip_id = static_cast<ClipId>(k);
    clip.t_start = c.t0 + static_cast<double>(index) / c.fps;
    clip.t_end = c.t0 + static_cast<double>(index + c.scene_frames[k]) / c.fps;
    clip.anchor_s = clip.t_start;
    const TokenSeq cap = caption_tokens(c, k);
    clip.caption_pool = {render(cap)};
    out.trace.timeline.clips.push_back(clip);
    out.trace.caption_tokens[clip.clip_id] = {cap};

    for (int i = 0; i < c.scene_frames[k]; ++i, ++index) {
      const auto v = static_cast<int>(
          mix64(static_cast<std::uint64_t>(index)) % static_cast<std::uint64_t>(c.variants));
      FrameBlock f;
      f.timestamp_s = c.t0 + static_cast<double>(index) / c.fps;
      f.frame_index = index;
      f.tokens.assign(static_cast<std::size_t>(c.tokens_per_frame), frame_token(c, k, v));
      out.trace.frames.push_back(std::move(f));
    }

    for (int v = 0; v < c.variants; ++v) {
      const TokenId f = frame_token(c, k, v);
      const double q = c.in_prob - v * c.variant_step;
      for (int d = 0; d <= static_cast<int>(c.lag_factors.size()) && d <= k; ++d) {
        const double g = d == 0 ? 1.0 : c.lag_factors[d - 1];
        const double lp = std::log(q / g);
        const TokenSeq target = caption_tokens(c, k - d);
        TokenSeq suffix = {f};
        for (TokenId t : target) {
          sc.add_suffix(suffix, t, lp);
          suffix.push_back(t);
        }
      }
    }
  }
  return out;
}

ScriptConfig two_clip_config(int frames_per_scene) {
  ScriptConfig c;
  c.scene_frames = {frames_per_scene, frames_per_scene};
  c.in_prob = 0.9;
  c.lag_factors = {1.8};
  return c;
}

ScriptConfig random_monotone_config(Rng& rng) {
  ScriptConfig c;
  const int scenes = 3 + static_cast<int>(rng.below(8));
  for (int k = 0; k < scenes; ++k) c.scene_frames.push_back(1 + static_cast<int>(rng.below(5)));
  c.tokens_per_frame = 1 + static_cast<int>(rng.below(4));
  c.caption_len = 1 + static_cast<int>(rng.below(3));
  c.in_prob = 0.5 + 0.45 * rng.uniform();
  const int lags = 1 + static_cast<int>(rng.below(4));
  double g = 1.0;
  c.lag_factors.clear();
  for (int d = 0; d < lags; ++d) {
    g += (0.2 / lags) * (0.05 + 0.95 * rng.uniform());
    c.lag_factors.push_back(g);
  }
  return c;
}

ScriptConfig long_stream_config(std::uint64_t seed, int frames) {
  Rng rng = Rng::stream(seed, "synth");
  ScriptConfig c;
  int left = frames;
  while (left > 0) {
    const int n = std::min(left, 20 + static_cast<int>(rng.below(41)));
    c.scene_frames.push_back(n);
    left -= n;
  }
  c.fps = 3.0;
  c.tokens_per_frame = 16;
  c.caption_len = 4;
  c.variants = 16;
  c.in_prob = 0.9;
  c.variant_step = 0.001;
  c.lag_factors = {1.8, 2.5};
  return c;
}

void write_scripted_stream(const ScriptedStream& stream,
                           const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_trace(stream.trace, dir / (stem + ".ndjson"));
  stream.scenario.save(dir / (stem + ".scenario.json"));
}

}  // namespace streamgate
