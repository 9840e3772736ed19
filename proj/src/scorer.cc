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

#include "streamgate/scorer.h"

#include <cmath>
#include <string>

#include "streamgate/error.h"
#include "streamgate/fingerprint.h"
#include "streamgate/rng.h"

namespace streamgate {

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) throw InvalidArgument("perplexity of an empty caption");
  double sum = 0.0;
  for (double lp : logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

double perplexity(const ScoreResult& result) {
  return perplexity(std::span<const double>(result.logprobs));
}

std::uint64_t Scorer::state_checksum(std::uint64_t prefix_fp,
                                     std::size_t block_begin) const {
  return mix64(prefix_fp ^ mix64(block_begin));
}

void check_tokens(const ScorerConfig& config, std::span<const TokenId> ids) {
  for (TokenId id : ids) {
    if (id >= config.vocabulary_size) {
      throw ScorerError("token id " + std::to_string(id) +
                        " outside vocabulary of size " +
                        std::to_string(config.vocabulary_size));
    }
  }
}

void check_context(const ScorerConfig& config, std::size_t context_len,
                   std::size_t continuation_len) {
  if (context_len + continuation_len > config.context_limit) {
    throw ContextOverflow("context of " +
                          std::to_string(context_len + continuation_len) +
                          " tokens exceeds scorer limit " +
                          std::to_string(config.context_limit));
  }
}

}  // namespace streamgate
