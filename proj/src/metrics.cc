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

#include "streamgate/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "streamgate/error.h"

namespace streamgate {
namespace {

std::size_t nearest_anchor(const Timeline& timeline, double t) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < timeline.clips.size(); ++k) {
    const double dist = std::abs(t - timeline.clips[k].anchor_s);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

TimingScores score_timing(std::span<const double> responses, const Timeline& timeline,
                          DiffReference reference) {
  if (timeline.empty()) throw InvalidArgument("timing metrics need a non-empty timeline");
  TimingScores out;
  out.per_scene.reserve(timeline.size());
  for (const SemanticClip& c : timeline.clips) {
    SceneScore s;
    s.clip_id = c.clip_id;
    s.t_start = c.t_start;
    s.t_end = c.t_end;
    s.anchor = reference == DiffReference::kAnchor ? c.anchor_s : c.t_start;
    out.per_scene.push_back(std::move(s));
  }

  std::vector<double> sorted(responses.begin(), responses.end());
  std::sort(sorted.begin(), sorted.end());
  for (double r : sorted) {
    auto it = std::find_if(timeline.clips.begin(), timeline.clips.end(),
                           [r](const SemanticClip& c) { return c.contains(r); });
    if (it != timeline.clips.end()) {
      out.per_scene[it - timeline.clips.begin()].responses.push_back(r);
    } else {
      out.per_scene[nearest_anchor(timeline, r)].orphans.push_back(r);
    }
  }

  for (SceneScore& s : out.per_scene) {
    const std::size_t n = s.responses.size();
    s.covered = n >= 1;
    if (s.covered) {
      for (double r : s.responses) s.diff += std::abs(r - s.anchor);
    } else {
      s.diff = s.t_end - s.t_start;
    }
    for (double r : s.orphans) s.diff += std::abs(r - s.anchor);
    s.redundant = static_cast<double>(n > 0 ? n - 1 : 0) +
                  static_cast<double>(s.orphans.size());
    out.tim_diff += s.diff;
    out.tim_redun += s.redundant;
    out.tim_cover += s.covered ? 1.0 : 0.0;
  }
  const auto k = static_cast<double>(out.per_scene.size());
  out.tim_diff /= k;
  out.tim_redun /= k;
  out.tim_cover /= k;
  return out;
}

double tim_diff(const ResponseLog& log, const Timeline& timeline) {
  return score_timing(response_times(log), timeline).tim_diff;
}

double tim_redun(const ResponseLog& log, const Timeline& timeline) {
  return score_timing(response_times(log), timeline).tim_redun;
}

double tim_cover(const ResponseLog& log, const Timeline& timeline) {
  return score_timing(response_times(log), timeline).tim_cover;
}

double token_accuracy(std::span<const TokenId> predicted,
                      std::span<const TokenId> reference) {
  if (reference.empty()) throw InvalidArgument("token_accuracy: empty reference");
  if (predicted.size() != reference.size()) {
    throw InvalidArgument("token_accuracy: length mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (predicted[i] == reference[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

WindowPick otg_localize(std::span<const double> series, std::size_t window_len) {
  if (window_len < 1) throw InvalidArgument("otg_localize: window_len must be >= 1");
  if (series.size() < window_len) {
    throw InvalidArgument("otg_localize: series shorter than the window");
  }
  const auto starts = static_cast<std::int64_t>(series.size() - window_len + 1);
  std::int64_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();

#pragma omp parallel
  {
    std::int64_t local = -1;
    double local_sum = std::numeric_limits<double>::infinity();
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < starts; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < window_len; ++j) {
        sum += series[static_cast<std::size_t>(i) + j];
      }
      if (sum < local_sum) {
        local_sum = sum;
        local = i;
      }
    }
#pragma omp critical
    if (local >= 0 && (local_sum < best_sum || (local_sum == best_sum && local < best))) {
      best_sum = local_sum;
      best = local;
    }
  }

  const auto b = static_cast<std::size_t>(best);
  return WindowPick{b, b + window_len, best_sum / static_cast<double>(window_len)};
}

}  // namespace streamgate
