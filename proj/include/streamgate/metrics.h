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

// Online timing metrics over a response log and a ground-truth timeline,
// plus teacher-forced token accuracy and perplexity-window grounding.
//
// Per scene k with anchor a_k and in-scene responses R_k (n_k = |R_k|):
//   diff_k      = sum_{r in R_k} |r - a_k|   if n_k >= 1, else scene duration
//   redundant_k = max(0, n_k - 1)
//   covered_k   = [n_k >= 1]
// A response outside every scene is an orphan: it is charged to the scene
// with the nearest anchor (earlier scene on ties), adding |r - a_k| to
// diff_k and 1 to redundant_k, without covering it. Each metric is the
// scene-level (macro) mean. DiffReference::kSceneStart measures deviations
// from t_start instead of the anchor.

#ifndef STREAMGATE_METRICS_H_
#define STREAMGATE_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "streamgate/types.h"

namespace streamgate {

struct SceneScore {
  ClipId clip_id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double anchor = 0.0;
  std::vector<double> responses;
  std::vector<double> orphans;
  double diff = 0.0;
  double redundant = 0.0;
  bool covered = false;
};

struct TimingScores {
  double tim_diff = 0.0;
  double tim_redun = 0.0;
  double tim_cover = 0.0;
  std::vector<SceneScore> per_scene;
};

enum class DiffReference : std::uint8_t { kAnchor, kSceneStart };

// Throws InvalidArgument on an empty timeline. Response order is irrelevant.
TimingScores score_timing(std::span<const double> responses, const Timeline& timeline,
                          DiffReference reference = DiffReference::kAnchor);

double tim_diff(const ResponseLog& log, const Timeline& timeline);
double tim_redun(const ResponseLog& log, const Timeline& timeline);
double tim_cover(const ResponseLog& log, const Timeline& timeline);

// Fraction of positions where the teacher-forced prediction equals the
// reference token. Throws InvalidArgument on empty or mismatched input.
double token_accuracy(std::span<const TokenId> predicted,
                      std::span<const TokenId> reference);

struct WindowPick {
  std::size_t begin = 0;
  std::size_t end = 0;
  double mean = 0.0;

  friend bool operator==(const WindowPick&, const WindowPick&) = default;
};

// Window of `window_len` consecutive frames with the lowest mean perplexity;
// the earliest start wins ties. OpenMP over window starts;
// reference::otg_localize is the serial twin.
WindowPick otg_localize(std::span<const double> ppl_series, std::size_t window_len);

}  // namespace streamgate

#endif  // STREAMGATE_METRICS_H_
