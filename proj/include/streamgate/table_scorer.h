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

// Deterministic table-driven scorer used as the reference implementation of
// the scorer contract.
//
// A scenario maps (context, token) pairs to log-probabilities. Contexts are
// matched in priority order:
//   1. exact: the 64-bit FNV-1a fingerprint of the whole preceding sequence;
//   2. suffix: the preceding sequence ends with the given tokens, longest
//      suffix first.
// A token scores with the first matching context that lists it and falls
// back to ln(1 / vocabulary_size) otherwise. Greedy generation takes the
// highest-scoring entry of the first matching context (ties go to the
// smaller id) and stops at the end token, when no context matches, or at
// max_len.

#ifndef STREAMGATE_TABLE_SCORER_H_
#define STREAMGATE_TABLE_SCORER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "streamgate/scorer.h"

namespace streamgate {

struct ScenarioEntry {
  enum class Match : std::uint8_t { kExact, kSuffix };

  Match match = Match::kSuffix;
  // Suffix tokens, or the full context for exact entries given as tokens.
  TokenSeq context;
  // Fingerprint of the full context (exact entries only).
  std::uint64_t fingerprint = 0;
  TokenId token = 0;
  double logprob = 0.0;

  friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

struct Scenario {
  std::uint64_t vocabulary_size = 2;
  int max_generation_len = 32;
  std::size_t context_limit = kDefaultContextBudget;
  std::optional<TokenId> end_token;
  std::vector<ScenarioEntry> entries;

  void add_exact(const TokenSeq& context, TokenId token, double logprob);
  void add_exact_fingerprint(std::uint64_t fp, TokenId token, double logprob);
  void add_suffix(TokenSeq suffix, TokenId token, double logprob);

  // JSON scenario file, see docs/formats.md. Throws ScorerError on invalid
  // content and InvalidArgument on I/O failure.
  static Scenario load(const std::filesystem::path& path);
  static Scenario parse(const std::string& text);
  std::string dump() const;
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class TableScorer : public Scorer {
 public:
  explicit TableScorer(Scenario scenario);

  const ScorerConfig& config() const override { return config_; }
  const Scenario& scenario() const { return scenario_; }

  ScoreResult score(std::span<const TokenId> context,
                    std::span<const TokenId> continuation,
                    const AttentionMask* mask = nullptr) override;
  Generation generate(std::span<const TokenId> context, int max_len) override;

  double fallback_logprob() const { return fallback_; }

 private:
  using Table = std::map<TokenId, double>;

  // The sequence context ++ continuation[0, cont_len).
  struct View {
    std::span<const TokenId> context;
    std::span<const TokenId> continuation;
    std::size_t cont_len;
    std::uint64_t full_fp;

    std::size_t size() const { return context.size() + cont_len; }
    TokenId at(std::size_t i) const {
      return i < context.size() ? context[i] : continuation[i - context.size()];
    }
  };

  // Matching contexts in priority order.
  std::vector<const Table*> matches(const View& view) const;
  double lookup(const View& view, TokenId token) const;

  Scenario scenario_;
  ScorerConfig config_;
  double fallback_;
  std::unordered_map<std::uint64_t, Table> exact_;
  struct SuffixContext {
    TokenSeq suffix;
    Table table;
  };
  // Keyed by suffix length (descending), then by suffix fingerprint.
  std::map<std::size_t, std::unordered_map<std::uint64_t, std::vector<SuffixContext>>,
           std::greater<>>
      suffix_;
};

}  // namespace streamgate

#endif  // STREAMGATE_TABLE_SCORER_H_
