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

#include "streamgate/trace.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "streamgate/error.h"
#include "streamgate/format.h"

namespace streamgate {
namespace {

using nlohmann::json;

double get_seconds(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_number()) {
    throw TraceError(line, std::string("missing numeric field \"") + key + "\"");
  }
  const double v = it->get<double>();
  if (!(v >= 0.0) || v == std::numeric_limits<double>::infinity()) {
    throw TraceError(line, std::string("field \"") + key +
                               "\" must be a finite non-negative time");
  }
  return v;
}

std::int64_t get_int(const json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_number_integer()) {
    throw TraceError(line, std::string("missing integer field \"") + key + "\"");
  }
  return it->get<std::int64_t>();
}

TokenSeq get_tokens(const json& arr, std::size_t line) {
  if (!arr.is_array()) throw TraceError(line, "token list must be an array");
  TokenSeq out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
        v.get<std::int64_t>() > std::numeric_limits<TokenId>::max()) {
      throw TraceError(line, "token ids must be non-negative 32-bit integers");
    }
    out.push_back(static_cast<TokenId>(v.get<std::int64_t>()));
  }
  return out;
}

ClipId get_clip_id(const json& rec, std::size_t line) {
  const std::int64_t id = get_int(rec, "clip_id", line);
  if (id < 0 || id > std::numeric_limits<ClipId>::max()) {
    throw TraceError(line, "clip_id out of range");
  }
  return static_cast<ClipId>(id);
}

// Shared by validate_timeline and parse_trace; `lines[i]` is the source line
// of clip i, or 0.
Timeline validate_with_lines(Timeline timeline, std::vector<std::size_t> lines) {
  auto& clips = timeline.clips;
  lines.resize(clips.size(), 0);
  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clips[a].t_start < clips[b].t_start;
  });

  std::set<ClipId> seen;
  Timeline out;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const SemanticClip& c = clips[order[rank]];
    const std::size_t line = lines[order[rank]];
    if (!(c.t_end > c.t_start + kTimeEpsilon)) {
      throw TraceError(line, "empty clip interval");
    }
    if (c.anchor_s < c.t_start - kTimeEpsilon ||
        c.anchor_s >= c.t_end - kTimeEpsilon) {
      throw TraceError(line, "anchor outside clip");
    }
    if (c.caption_pool.empty()) throw TraceError(line, "empty pool");
    if (!seen.insert(c.clip_id).second) {
      throw TraceError(line, "duplicate clip_id " + std::to_string(c.clip_id));
    }
    if (!out.clips.empty()) {
      const SemanticClip& prev = out.clips.back();
      if (c.t_start < prev.t_end - kTimeEpsilon) {
        throw TraceError(line, "overlap at t=" + format_double(c.t_start) +
                                   ".." + format_double(prev.t_end));
      }
    }
    out.clips.push_back(c);
  }
  return out;
}

}  // namespace

Timeline validate_timeline(Timeline timeline) {
  return validate_with_lines(std::move(timeline), {});
}

ParsedTrace parse_trace(std::istream& in) {
  ParsedTrace result;
  Trace& trace = result.trace;
  std::vector<std::size_t> clip_lines;
  std::vector<std::pair<std::size_t, ClipId>> pool_lines;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw TraceError(line, "malformed JSON record");
    }
    auto type_it = rec.find("type");
    if (type_it == rec.end() || !type_it->is_string()) {
      throw TraceError(line, "record has no \"type\"");
    }
    const std::string type = type_it->get<std::string>();

    if (type == "frame") {
      FrameBlock f;
      f.timestamp_s = get_seconds(rec, "t", line);
      f.frame_index = get_int(rec, "frame_index", line);
      auto tok = rec.find("tokens");
      if (tok == rec.end()) throw TraceError(line, "frame has no tokens");
      f.tokens = get_tokens(*tok, line);
      if (f.tokens.empty()) throw TraceError(line, "frame has no tokens");
      if (!trace.frames.empty() &&
          f.timestamp_s <= trace.frames.back().timestamp_s + kTimeEpsilon) {
        throw TraceError(line, "non-monotone timestamps");
      }
      trace.frames.push_back(std::move(f));
    } else if (type == "gt_clip") {
      SemanticClip c;
      c.clip_id = get_clip_id(rec, line);
      c.t_start = get_seconds(rec, "t_start", line);
      c.t_end = get_seconds(rec, "t_end", line);
      c.anchor_s = rec.contains("anchor") ? get_seconds(rec, "anchor", line)
                                          : c.t_start;
      auto caps = rec.find("captions");
      if (caps == rec.end() || !caps->is_array()) {
        throw TraceError(line, "gt_clip needs a \"captions\" array");
      }
      for (const json& s : *caps) {
        if (!s.is_string()) throw TraceError(line, "captions must be strings");
        c.caption_pool.push_back(s.get<std::string>());
      }
      if (!(c.t_end > c.t_start + kTimeEpsilon)) {
        throw TraceError(line, "empty clip interval");
      }
      if (c.anchor_s < c.t_start - kTimeEpsilon ||
          c.anchor_s >= c.t_end - kTimeEpsilon) {
        throw TraceError(line, "anchor outside clip");
      }
      trace.timeline.clips.push_back(std::move(c));
      clip_lines.push_back(line);
    } else if (type == "gt_caption_tokens") {
      const ClipId id = get_clip_id(rec, line);
      auto pool = rec.find("pool");
      if (pool == rec.end() || !pool->is_array() || pool->empty()) {
        throw TraceError(line, "empty pool");
      }
      std::vector<TokenSeq> seqs;
      for (const json& p : *pool) {
        seqs.push_back(get_tokens(p, line));
        if (seqs.back().empty()) throw TraceError(line, "empty caption tokens");
      }
      if (!trace.caption_tokens.emplace(id, std::move(seqs)).second) {
        throw TraceError(line, "duplicate gt_caption_tokens for clip_id " +
                                   std::to_string(id));
      }
      pool_lines.emplace_back(line, id);
    } else {
      result.warnings.push_back("line " + std::to_string(line) +
                                ": skipping unknown record type \"" + type +
                                "\"");
    }
  }

  trace.timeline =
      validate_with_lines(std::move(trace.timeline), std::move(clip_lines));
  for (const auto& [l, id] : pool_lines) {
    const bool known = std::any_of(
        trace.timeline.clips.begin(), trace.timeline.clips.end(),
        [id = id](const SemanticClip& c) { return c.clip_id == id; });
    if (!known) {
      throw TraceError(l, "gt_caption_tokens for unknown clip_id " +
                              std::to_string(id));
    }
  }
  return result;
}

ParsedTrace parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trace file: " + path.string());
  return parse_trace(in);
}

void serialize_trace(const Trace& trace, std::ostream& out) {
  for (const FrameBlock& f : trace.frames) {
    nlohmann::ordered_json j;
    j["type"] = "frame";
    j["t"] = f.timestamp_s;
    j["frame_index"] = f.frame_index;
    j["tokens"] = f.tokens;
    out << j.dump() << '\n';
  }
  for (const SemanticClip& c : trace.timeline.clips) {
    nlohmann::ordered_json j;
    j["type"] = "gt_clip";
    j["clip_id"] = c.clip_id;
    j["t_start"] = c.t_start;
    j["t_end"] = c.t_end;
    j["anchor"] = c.anchor_s;
    j["captions"] = c.caption_pool;
    out << j.dump() << '\n';
  }
  for (const auto& [id, pool] : trace.caption_tokens) {
    nlohmann::ordered_json j;
    j["type"] = "gt_caption_tokens";
    j["clip_id"] = id;
    j["pool"] = pool;
    out << j.dump() << '\n';
  }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write trace file: " + path.string());
  serialize_trace(trace, out);
}

}  // namespace streamgate
