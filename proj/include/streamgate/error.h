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

#ifndef STREAMGATE_ERROR_H_
#define STREAMGATE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamgate {

// Process exit codes used by the command-line tools.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kTrace = 3,
  kScorer = 4,
  kInternal = 5,
};

// Base of every error thrown by the library. Each subclass maps to one exit
// code so the CLI never has to inspect messages.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Bad configuration or a violated precondition on a caller-supplied argument.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ExitCode::kUsage, what) {}
};

// Malformed or inconsistent trace input. `line` is 1-based, 0 when the error
// is not tied to a single record.
class TraceError : public Error {
 public:
  TraceError(std::size_t line, const std::string& what)
      : Error(ExitCode::kTrace,
              line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line),
        reason_(what) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class ScorerError : public Error {
 public:
  explicit ScorerError(const std::string& what)
      : Error(ExitCode::kScorer, what) {}
};

// The scored context would not fit the scorer's context window.
class ContextOverflow : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// Internal corruption: a broken invariant that no input should be able to
// produce.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ExitCode::kInternal, what) {}
};

// Appending the next frame would exceed the session's context budget. The
// session state is unchanged when this is thrown, so callers may prune and
// retry.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t needed, std::size_t budget)
      : Error(ExitCode::kInternal,
              "context budget exceeded: need " + std::to_string(needed) +
                  " tokens, budget " + std::to_string(budget)),
        needed_(needed),
        budget_(budget) {}
  std::size_t needed() const { return needed_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t needed_;
  std::size_t budget_;
};

}  // namespace streamgate

#endif  // STREAMGATE_ERROR_H_
