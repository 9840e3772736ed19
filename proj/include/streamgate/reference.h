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

// Serial reference versions of the OpenMP kernels. They favour the most
// literal formulation over speed and exist for equivalence tests and
// benchmarks.

#ifndef STREAMGATE_REFERENCE_H_
#define STREAMGATE_REFERENCE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "streamgate/metrics.h"
#include "streamgate/peak_end.h"
#include "streamgate/scam.h"

namespace streamgate::reference {

// Cell-by-cell evaluation of the visibility rule.
bool scam_visible(const SequenceLayout& layout,
                  std::span<const std::uint32_t> owner, std::size_t q,
                  std::size_t k);
AttentionMask build_scam_mask(const SequenceLayout& layout);

WindowPick otg_localize(std::span<const double> ppl_series, std::size_t window_len);

std::vector<double> prune_survival(const ContextBuffer& ctx,
                                   std::span<const MemoryRecord> records,
                                   const PeakEndConfig& config, double now_s,
                                   std::uint64_t seed, std::int64_t trials);

}  // namespace streamgate::reference

#endif  // STREAMGATE_REFERENCE_H_
