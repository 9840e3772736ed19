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

#include "streamgate/judge.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "streamgate/error.h"

namespace streamgate {
namespace {

std::map<std::string, int> bag(std::string_view text) {
  std::map<std::string, int> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) ++out[word];
  return out;
}

}  // namespace

const std::vector<std::string>& judge_dimensions(JudgeTask task) {
  static const std::vector<std::string> semcor = {
      "semantic_accuracy", "language_quality", "information_completeness"};
  static const std::vector<std::string> sumfluen = {
      "writing_logicality", "language_fluency", "writing_conciseness",
      "semantic_consistency", "narrative_completeness"};
  return task == JudgeTask::kSemCor ? semcor : sumfluen;
}

double token_overlap_f1(std::string_view response, std::string_view reference) {
  const auto resp = bag(response);
  const auto ref = bag(reference);
  int resp_n = 0, ref_n = 0, common = 0;
  for (const auto& [w, c] : resp) resp_n += c;
  for (const auto& [w, c] : ref) {
    ref_n += c;
    if (auto it = resp.find(w); it != resp.end()) common += std::min(c, it->second);
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / resp_n;
  const double recall = static_cast<double>(common) / ref_n;
  return 2.0 * precision * recall / (precision + recall);
}

JudgeScores judge_stub_score(std::string_view response, std::string_view reference,
                             JudgeTask task) {
  if (bag(reference).empty()) throw InvalidArgument("judge: empty reference");
  const double s = 10.0 * token_overlap_f1(response, reference);
  JudgeScores out;
  for (const std::string& dim : judge_dimensions(task)) out.dimensions.emplace_back(dim, s);
  out.mean = s;
  return out;
}

}  // namespace streamgate
