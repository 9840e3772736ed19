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

#include "streamgate/reference.h"

#include <limits>

#include "streamgate/error.h"

namespace streamgate::reference {

bool scam_visible(const SequenceLayout& layout,
                  std::span<const std::uint32_t> owner, std::size_t q,
                  std::size_t k) {
  if (k > q) return false;
  const Span& qs = layout.spans[owner[q]];
  const Span& ks = layout.spans[owner[k]];
  if (ks.kind == SpanKind::kFrame) return true;
  if (owner[k] == owner[q]) return true;
  if (ks.clip_ordinal < qs.clip_ordinal) return ks.clip_final;
  return false;
}

AttentionMask build_scam_mask(const SequenceLayout& layout) {
  const std::size_t n = layout.size();
  const std::vector<std::uint32_t> owner = span_index(layout);
  AttentionMask mask(n);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      if (scam_visible(layout, owner, q, k)) mask.set(q, k, true);
    }
  }
  return mask;
}

WindowPick otg_localize(std::span<const double> series, std::size_t window_len) {
  if (window_len < 1 || series.size() < window_len) {
    throw InvalidArgument("otg_localize: bad window");
  }
  WindowPick best{0, window_len, std::numeric_limits<double>::infinity()};
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + window_len <= series.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < window_len; ++j) sum += series[i + j];
    if (sum < best_sum) {
      best_sum = sum;
      best = WindowPick{i, i + window_len, sum / static_cast<double>(window_len)};
    }
  }
  return best;
}

std::vector<double> prune_survival(const ContextBuffer& ctx,
                                   std::span<const MemoryRecord> records,
                                   const PeakEndConfig& config, double now_s,
                                   std::uint64_t seed, std::int64_t trials) {
  if (trials <= 0) throw InvalidArgument("prune_survival: trials must be positive");
  std::vector<std::int64_t> survived(records.size(), 0);
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(trial_seed(seed, t));
    const PruneResult r = prune(ctx, records, config, rng, now_s);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (r.ctx.find(records[i].block_id)) ++survived[i];
    }
  }
  std::vector<double> freq(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    freq[i] = static_cast<double>(survived[i]) / static_cast<double>(trials);
  }
  return freq;
}

}  // namespace streamgate::reference
