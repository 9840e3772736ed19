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

// The token-scorer contract the decoding gate runs against. A scorer returns
// natural-log probabilities of a continuation given a context and greedily
// generates captions. Any causal language model can sit behind it.

#ifndef STREAMGATE_SCORER_H_
#define STREAMGATE_SCORER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "streamgate/types.h"

namespace streamgate {

class AttentionMask;

// Per-token natural-log probabilities, each <= 0.
struct ScoreResult {
  std::vector<double> logprobs;

  std::size_t size() const { return logprobs.size(); }
  bool empty() const { return logprobs.empty(); }

  friend bool operator==(const ScoreResult&, const ScoreResult&) = default;
};

struct Generation {
  TokenSeq tokens;
  ScoreResult score;

  friend bool operator==(const Generation&, const Generation&) = default;
};

struct ScorerConfig {
  std::uint64_t vocabulary_size = 2;
  bool deterministic = true;
  int max_generation_len = 32;
  std::size_t context_limit = kDefaultContextBudget;
  // True if score/generate may be called concurrently from several sessions.
  bool concurrent = false;
};

// exp(-(1/N) * sum(logprobs)): the N-th root of the inverse sequence
// probability. Throws InvalidArgument on an empty list.
double perplexity(const ScoreResult& result);
double perplexity(std::span<const double> logprobs);

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const ScorerConfig& config() const = 0;

  // Log-probabilities of `continuation` conditioned autoregressively on
  // `context`. `mask` is passed through to scorers that accept one; nullptr
  // means plain causal attention.
  virtual ScoreResult score(std::span<const TokenId> context,
                            std::span<const TokenId> continuation,
                            const AttentionMask* mask = nullptr) = 0;

  // Greedy decode until the scorer's end-of-caption sentinel or `max_len`
  // tokens. The returned score equals score(context, tokens).
  virtual Generation generate(std::span<const TokenId> context, int max_len) = 0;

  // Deterministic stand-in for the key/value state a block leaves behind
  // when it starts at `block_begin` and `prefix_fp` is the fingerprint of
  // every token up to and including the block. Used to audit cache
  // integrity.
  virtual std::uint64_t state_checksum(std::uint64_t prefix_fp,
                                       std::size_t block_begin) const;
};

// Shared argument checks for scorer implementations.
void check_tokens(const ScorerConfig& config, std::span<const TokenId> ids);
void check_context(const ScorerConfig& config, std::size_t context_len,
                   std::size_t continuation_len);

}  // namespace streamgate

#endif  // STREAMGATE_SCORER_H_
