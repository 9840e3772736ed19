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

#include "streamgate/peak_end.h"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "streamgate/error.h"

namespace streamgate {
namespace {

// Record indices in ascending timestamp order (stable).
std::vector<std::size_t> visit_order(std::span<const MemoryRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].timestamp_s < records[b].timestamp_s;
  });
  return order;
}

std::vector<double> probabilities(std::span<const MemoryRecord> records,
                                  const PeakEndConfig& config, double now_s) {
  const auto ranges = clip_ppl_ranges(records);
  std::vector<double> p(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    p[i] = deletion_probability(records[i], ranges.at(records[i].clip), now_s,
                                config);
  }
  return p;
}

void check_coverage(const ContextBuffer& ctx, std::span<const MemoryRecord> records) {
  std::unordered_set<BlockId> known;
  for (const MemoryRecord& r : records) known.insert(r.block_id);
  for (const ContextBlock& b : ctx.blocks()) {
    if (b.is_frame() && !known.contains(b.id)) {
      throw InvalidArgument("prune: no memory record for frame block " +
                            std::to_string(b.id));
    }
  }
  for (const MemoryRecord& r : records) {
    auto idx = ctx.find(r.block_id);
    if (!idx || !ctx.blocks()[*idx].is_frame()) {
      throw InvalidArgument("prune: record for block " +
                            std::to_string(r.block_id) +
                            " does not name a frame in the context");
    }
  }
}

}  // namespace

void validate(const PeakEndConfig& config) {
  if (!(config.fps > 0.0)) throw InvalidArgument("fps must be positive");
  if (config.window_frames < 1) throw InvalidArgument("window_frames must be >= 1");
  if (!(config.p_max >= 0.0 && config.p_max <= 1.0)) {
    throw InvalidArgument("p_max must lie in [0, 1]");
  }
}

std::map<std::size_t, PplRange> clip_ppl_ranges(std::span<const MemoryRecord> records) {
  std::map<std::size_t, PplRange> out;
  for (const MemoryRecord& r : records) {
    auto [it, inserted] = out.try_emplace(r.clip, PplRange{r.frame_ppl, r.frame_ppl});
    if (!inserted) {
      it->second.min = std::min(it->second.min, r.frame_ppl);
      it->second.max = std::max(it->second.max, r.frame_ppl);
    }
  }
  return out;
}

double deletion_probability(const MemoryRecord& record, const PplRange& clip,
                            double now_s, const PeakEndConfig& config) {
  validate(config);
  if (record.is_protected) return 0.0;
  const double window = static_cast<double>(config.window_frames);
  const double age_frames = (now_s - record.timestamp_s) * config.fps;
  if (age_frames <= window + kTimeEpsilon * config.fps) return 0.0;
  const double rel = (record.frame_ppl - clip.min) / (clip.max - clip.min + 1e-9);
  const double age_factor = std::min(1.0, (age_frames - window) / window);
  return std::clamp(config.p_max * rel * age_factor, 0.0, 1.0);
}

void protect_keyframes(std::vector<MemoryRecord>& records, std::size_t open_clip) {
  std::map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const MemoryRecord& r = records[i];
    if (r.clip >= open_clip) continue;
    auto [it, inserted] = best.try_emplace(r.clip, i);
    if (inserted) continue;
    const MemoryRecord& cur = records[it->second];
    if (r.frame_ppl < cur.frame_ppl ||
        (r.frame_ppl == cur.frame_ppl && r.timestamp_s < cur.timestamp_s)) {
      it->second = i;
    }
  }
  for (const auto& [clip, idx] : best) records[idx].is_protected = true;
}

PruneResult prune(const ContextBuffer& ctx, std::span<const MemoryRecord> records,
                  const PeakEndConfig& config, Rng& rng, double now_s) {
  validate(config);
  check_coverage(ctx, records);
  const std::vector<double> p = probabilities(records, config, now_s);
  PruneResult out{ctx, {}, {}};
  for (std::size_t i : visit_order(records)) {
    if (rng.uniform() < p[i]) {
      out.deleted.push_back(records[i].block_id);
      out.deleted_frames.push_back(records[i].frame_index);
    }
  }
  out.ctx.remove(out.deleted);
  return out;
}

std::vector<double> prune_survival(const ContextBuffer& ctx,
                                   std::span<const MemoryRecord> records,
                                   const PeakEndConfig& config, double now_s,
                                   std::uint64_t seed, std::int64_t trials) {
  validate(config);
  check_coverage(ctx, records);
  if (trials <= 0) throw InvalidArgument("prune_survival: trials must be positive");
  const std::vector<double> p = probabilities(records, config, now_s);
  const std::vector<std::size_t> order = visit_order(records);
  const std::size_t n = records.size();
  std::vector<std::int64_t> survived(n, 0);

#pragma omp parallel
  {
    std::vector<std::int64_t> local(n, 0);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < trials; ++t) {
      Rng rng(trial_seed(seed, t));
      for (std::size_t i : order) {
        if (!(rng.uniform() < p[i])) ++local[i];
      }
    }
#pragma omp critical
    for (std::size_t i = 0; i < n; ++i) survived[i] += local[i];
  }

  std::vector<double> freq(n);
  for (std::size_t i = 0; i < n; ++i) {
    freq[i] = static_cast<double>(survived[i]) / static_cast<double>(trials);
  }
  return freq;
}

}  // namespace streamgate
