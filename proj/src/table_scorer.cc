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

#include "streamgate/table_scorer.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "streamgate/error.h"
#include "streamgate/fingerprint.h"

namespace streamgate {
namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    throw ScorerError("scenario: bad fingerprint \"" + s + "\"");
  }
  if (used != s.size()) throw ScorerError("scenario: bad fingerprint \"" + s + "\"");
  return v;
}

TokenSeq parse_ids(const json& arr) {
  if (!arr.is_array()) throw ScorerError("scenario: token list must be an array");
  TokenSeq out;
  for (const json& v : arr) {
    if (!v.is_number_unsigned()) {
      throw ScorerError("scenario: token ids must be non-negative integers");
    }
    out.push_back(v.get<TokenId>());
  }
  return out;
}

}  // namespace

void Scenario::add_exact(const TokenSeq& context, TokenId token, double logprob) {
  entries.push_back(ScenarioEntry{ScenarioEntry::Match::kExact, context,
                                  fingerprint(context), token, logprob});
}

void Scenario::add_exact_fingerprint(std::uint64_t fp, TokenId token,
                                     double logprob) {
  entries.push_back(
      ScenarioEntry{ScenarioEntry::Match::kExact, {}, fp, token, logprob});
}

void Scenario::add_suffix(TokenSeq suffix, TokenId token, double logprob) {
  entries.push_back(ScenarioEntry{ScenarioEntry::Match::kSuffix,
                                  std::move(suffix), 0, token, logprob});
}

Scenario Scenario::parse(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ScorerError("scenario: not a JSON object");
  }
  Scenario s;
  try {
    s.vocabulary_size = j.at("vocabulary_size").get<std::uint64_t>();
    s.max_generation_len = j.value("max_generation_len", 32);
    s.context_limit = j.value("context_limit", kDefaultContextBudget);
    if (j.contains("end_token") && !j["end_token"].is_null()) {
      s.end_token = j["end_token"].get<TokenId>();
    }
    for (const json& e : j.value("entries", json::array())) {
      const TokenId token = e.at("token").get<TokenId>();
      double lp;
      if (e.contains("logprob")) {
        lp = e["logprob"].get<double>();
      } else {
        const double p = e.at("prob").get<double>();
        if (!(p > 0.0 && p <= 1.0)) {
          throw ScorerError("scenario: prob must lie in (0, 1]");
        }
        lp = std::log(p);
      }
      if (e.contains("suffix")) {
        s.add_suffix(parse_ids(e["suffix"]), token, lp);
      } else if (e.contains("ctx")) {
        s.add_exact(parse_ids(e["ctx"]), token, lp);
      } else if (e.contains("ctx_fp")) {
        s.add_exact_fingerprint(parse_hex64(e["ctx_fp"].get<std::string>()),
                                token, lp);
      } else {
        throw ScorerError("scenario: entry needs suffix, ctx or ctx_fp");
      }
    }
  } catch (const json::exception& ex) {
    throw ScorerError(std::string("scenario: ") + ex.what());
  }
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScorerError("cannot open scenario file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Scenario::dump() const {
  nlohmann::ordered_json j;
  j["vocabulary_size"] = vocabulary_size;
  j["max_generation_len"] = max_generation_len;
  j["context_limit"] = context_limit;
  if (end_token) j["end_token"] = *end_token;
  auto arr = nlohmann::ordered_json::array();
  for (const ScenarioEntry& e : entries) {
    nlohmann::ordered_json o;
    if (e.match == ScenarioEntry::Match::kSuffix) {
      o["suffix"] = e.context;
    } else if (e.fingerprint == fingerprint(e.context)) {
      o["ctx"] = e.context;
    } else {
      o["ctx_fp"] = hex64(e.fingerprint);
    }
    o["token"] = e.token;
    o["logprob"] = e.logprob;
    arr.push_back(std::move(o));
  }
  j["entries"] = std::move(arr);
  return j.dump();
}

void Scenario::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write scenario file: " + path.string());
  out << dump() << '\n';
}

TableScorer::TableScorer(Scenario scenario) : scenario_(std::move(scenario)) {
  if (scenario_.vocabulary_size < 2) {
    throw ScorerError("scenario: vocabulary_size must be at least 2");
  }
  if (scenario_.max_generation_len < 0) {
    throw ScorerError("scenario: max_generation_len must be non-negative");
  }
  if (scenario_.end_token && *scenario_.end_token >= scenario_.vocabulary_size) {
    throw ScorerError("scenario: end_token outside vocabulary");
  }
  config_.vocabulary_size = scenario_.vocabulary_size;
  config_.deterministic = true;
  config_.max_generation_len = scenario_.max_generation_len;
  config_.context_limit = scenario_.context_limit;
  config_.concurrent = true;
  fallback_ = -std::log(static_cast<double>(scenario_.vocabulary_size));

  for (const ScenarioEntry& e : scenario_.entries) {
    if (e.token >= scenario_.vocabulary_size) {
      throw ScorerError("scenario: entry token " + std::to_string(e.token) +
                        " outside vocabulary");
    }
    if (!(e.logprob <= 0.0) || !std::isfinite(e.logprob)) {
      throw ScorerError("scenario: logprob must be finite and <= 0");
    }
    Table* table;
    if (e.match == ScenarioEntry::Match::kExact) {
      table = &exact_[e.fingerprint];
    } else {
      if (e.context.empty()) throw ScorerError("scenario: empty suffix");
      auto& bucket = suffix_[e.context.size()][fingerprint(e.context)];
      auto it = std::find_if(bucket.begin(), bucket.end(),
                             [&](const SuffixContext& c) { return c.suffix == e.context; });
      if (it == bucket.end()) {
        bucket.push_back(SuffixContext{e.context, {}});
        it = bucket.end() - 1;
      }
      table = &it->table;
    }
    if (!table->emplace(e.token, e.logprob).second) {
      throw ScorerError("scenario: duplicate entry for token " +
                        std::to_string(e.token));
    }
  }
}

std::vector<const TableScorer::Table*> TableScorer::matches(const View& view) const {
  std::vector<const Table*> out;
  if (auto it = exact_.find(view.full_fp); it != exact_.end()) {
    out.push_back(&it->second);
  }
  const std::size_t n = view.size();
  TokenSeq tail;
  for (const auto& [len, buckets] : suffix_) {
    if (len > n) continue;
    tail.resize(len);
    for (std::size_t i = 0; i < len; ++i) tail[i] = view.at(n - len + i);
    auto it = buckets.find(fingerprint(tail));
    if (it == buckets.end()) continue;
    for (const SuffixContext& c : it->second) {
      if (c.suffix == tail) out.push_back(&c.table);
    }
  }
  return out;
}

double TableScorer::lookup(const View& view, TokenId token) const {
  for (const Table* t : matches(view)) {
    if (auto it = t->find(token); it != t->end()) return it->second;
  }
  return fallback_;
}

ScoreResult TableScorer::score(std::span<const TokenId> context,
                               std::span<const TokenId> continuation,
                               const AttentionMask* /*mask*/) {
  check_context(config_, context.size(), continuation.size());
  check_tokens(config_, context);
  check_tokens(config_, continuation);
  ScoreResult out;
  out.logprobs.reserve(continuation.size());
  View view{context, continuation, 0, fingerprint(context)};
  for (std::size_t i = 0; i < continuation.size(); ++i) {
    view.cont_len = i;
    out.logprobs.push_back(lookup(view, continuation[i]));
    view.full_fp = fnv1a_extend(view.full_fp, continuation[i]);
  }
  return out;
}

Generation TableScorer::generate(std::span<const TokenId> context, int max_len) {
  if (max_len < 0 || max_len > config_.max_generation_len) {
    throw InvalidArgument("generate: max_len " + std::to_string(max_len) +
                          " outside [0, " +
                          std::to_string(config_.max_generation_len) + "]");
  }
  check_context(config_, context.size(), static_cast<std::size_t>(max_len));
  check_tokens(config_, context);
  Generation gen;
  View view{context, gen.tokens, 0, fingerprint(context)};
  for (int step = 0; step < max_len; ++step) {
    view.continuation = gen.tokens;
    view.cont_len = gen.tokens.size();
    const auto tables = matches(view);
    if (tables.empty() || tables.front()->empty()) break;
    const Table& t = *tables.front();
    auto best = t.begin();
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    if (scenario_.end_token && best->first == *scenario_.end_token) break;
    gen.tokens.push_back(best->first);
    gen.score.logprobs.push_back(best->second);
    view.full_fp = fnv1a_extend(view.full_fp, best->first);
  }
  return gen;
}

}  // namespace streamgate
