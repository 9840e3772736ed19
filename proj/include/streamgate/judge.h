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

// Caption-quality judging. A Judge scores a response against a reference on
// a fixed set of 0-10 dimensions per task; an LLM-backed client can
// implement the interface. OverlapJudge is the deterministic stand-in.

#ifndef STREAMGATE_JUDGE_H_
#define STREAMGATE_JUDGE_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace streamgate {

enum class JudgeTask {
  // Per-scene semantic correctness.
  kSemCor,
  // Fluency of the concatenated responses against the concatenated
  // references.
  kSumFluen,
};

const std::vector<std::string>& judge_dimensions(JudgeTask task);

struct JudgeScores {
  std::vector<std::pair<std::string, double>> dimensions;
  double mean = 0.0;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  virtual JudgeScores score(JudgeTask task, std::string_view response,
                            std::string_view reference) = 0;
};

// Bag-of-words F1 between whitespace-separated tokens.
double token_overlap_f1(std::string_view response, std::string_view reference);

// Reports 10 x token_overlap_f1 on every dimension. Throws InvalidArgument on
// an empty reference.
JudgeScores judge_stub_score(std::string_view response, std::string_view reference,
                             JudgeTask task = JudgeTask::kSemCor);

class OverlapJudge : public Judge {
 public:
  std::string name() const override { return "token_overlap_stub"; }
  JudgeScores score(JudgeTask task, std::string_view response,
                    std::string_view reference) override {
    return judge_stub_score(response, reference, task);
  }
};

}  // namespace streamgate

#endif  // STREAMGATE_JUDGE_H_
