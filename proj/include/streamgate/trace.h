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

// Stream-trace files: newline-delimited JSON carrying pre-tokenized frames
// and the ground-truth timeline. See docs/formats.md for the record schemas.

#ifndef STREAMGATE_TRACE_H_
#define STREAMGATE_TRACE_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "streamgate/types.h"

namespace streamgate {

struct Trace {
  std::vector<FrameBlock> frames;
  Timeline timeline;
  // Tokenized caption pools keyed by clip id (optional records).
  std::map<ClipId, std::vector<TokenSeq>> caption_tokens;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct ParsedTrace {
  Trace trace;
  // One entry per skipped record of unknown type.
  std::vector<std::string> warnings;
};

// Parses a trace file. Throws InvalidArgument if the file cannot be opened
// and TraceError (carrying the 1-based line) for any rejected record.
ParsedTrace parse_trace(const std::filesystem::path& path);
ParsedTrace parse_trace(std::istream& in);

// Sorts clips by start time and checks ids, pools and overlap. Throws
// TraceError with line 0.
Timeline validate_timeline(Timeline timeline);

// Inverse of parse_trace for valid traces.
void serialize_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::filesystem::path& path);

}  // namespace streamgate

#endif  // STREAMGATE_TRACE_H_
