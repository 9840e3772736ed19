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

#include "streamgate/datagen.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "streamgate/error.h"
#include "streamgate/log.h"

namespace streamgate {
namespace {

using ordered_json = nlohmann::ordered_json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::size_t turn_tokens(const ClipTurns& c) {
  std::size_t n = 0;
  for (const auto& f : c.frames) n += f.size();
  for (const auto& t : c.captions) n += t.size();
  return n;
}

}  // namespace

DatagenResult build_training_sequences(const Trace& trace, const DatagenConfig& config) {
  if (config.pool_size < 1) throw InvalidArgument("--pool-size must be >= 1");
  if (config.context_budget < 2) throw InvalidArgument("--context-budget too small");

  DatagenResult out;
  const auto& clips = trace.timeline.clips;
  std::vector<ClipTurns> turns(clips.size());
  for (std::size_t k = 0; k < clips.size(); ++k) turns[k].clip_id = clips[k].clip_id;

  for (const FrameBlock& f : trace.frames) {
    std::size_t k = 0;
    while (k < clips.size() && !clips[k].contains(f.timestamp_s)) ++k;
    if (k == clips.size()) {
      ++out.dropped_frames;
      continue;
    }
    turns[k].frames.push_back(f.tokens);
  }

  Rng rng = Rng::stream(config.seed, "pool-sampling");
  std::vector<ClipTurns> kept;
  for (ClipTurns& c : turns) {
    if (c.frames.empty()) {
      ++out.empty_clips;
      continue;
    }
    auto it = trace.caption_tokens.find(c.clip_id);
    const std::size_t have = it == trace.caption_tokens.end() ? 0 : it->second.size();
    if (have < static_cast<std::size_t>(config.pool_size)) {
      throw TraceError(0, "clip " + std::to_string(c.clip_id) + " has " +
                              std::to_string(have) + " tokenized captions, pool size is " +
                              std::to_string(config.pool_size));
    }
    const std::span<const TokenSeq> pool(it->second.data(),
                                         static_cast<std::size_t>(config.pool_size));
    for (std::size_t i = 0; i < c.frames.size(); ++i) {
      c.captions.push_back(sample_caption(pool, rng));
    }
    kept.push_back(std::move(c));
  }
  if (out.dropped_frames > 0) {
    log().warn("datagen: {} frames outside every clip dropped", out.dropped_frames);
  }

  std::vector<ClipTurns> batch;
  std::size_t used = 0;
  for (ClipTurns& c : kept) {
    const std::size_t n = turn_tokens(c);
    if (n > config.context_budget) {
      throw TraceError(0, "clip " + std::to_string(c.clip_id) + " needs " + std::to_string(n) +
                              " tokens, more than the context budget");
    }
    if (used + n > config.context_budget) {
      out.sequences.push_back(build_interleaved_sequence(batch));
      batch.clear();
      used = 0;
    }
    used += n;
    batch.push_back(std::move(c));
  }
  if (!batch.empty()) out.sequences.push_back(build_interleaved_sequence(batch));
  return out;
}

std::vector<std::uint8_t> pack_loss_bits(const LossMask& loss) {
  std::vector<std::uint8_t> out((loss.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < loss.size(); ++i) {
    if (loss[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

std::string encode_sequence(const InterleavedSequence& seq) {
  const std::size_t n = seq.tokens.size();
  const AttentionMask mask = build_scam_mask(seq.layout);
  const std::vector<std::uint8_t> mask_bits = mask.pack_bits();
  const std::vector<std::uint8_t> loss_bits = pack_loss_bits(build_loss_mask(seq.layout));

  ordered_json spans = ordered_json::array();
  for (const Span& s : seq.layout.spans) {
    spans.push_back({{"kind", s.kind == SpanKind::kFrame ? "frame" : "caption"},
                     {"clip_id", s.clip_id},
                     {"clip_ordinal", s.clip_ordinal},
                     {"clip_final", s.clip_final},
                     {"begin", s.begin},
                     {"end", s.end}});
  }
  const std::size_t tokens_len = 4 * n;
  ordered_json header = {
      {"version", 1},
      {"n_tokens", n},
      {"tokens", {{"offset", 0}, {"length", tokens_len}}},
      {"mask", {{"offset", tokens_len}, {"length", mask_bits.size()}}},
      {"loss", {{"offset", tokens_len + mask_bits.size()}, {"length", loss_bits.size()}}},
      {"spans", spans}};
  const std::string h = header.dump();

  std::string out(kSequenceMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  for (const Token& t : seq.tokens) put_u32(out, t.id);
  out.append(mask_bits.begin(), mask_bits.end());
  out.append(loss_bits.begin(), loss_bits.end());
  return out;
}

void write_sequence_file(const std::filesystem::path& path, const InterleavedSequence& seq) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  const std::string bytes = encode_sequence(seq);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

SequenceFile decode_sequence(const std::string& bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 8, kSequenceMagic) != 0) {
    throw InvalidArgument("not a sequence file");
  }
  const std::uint32_t hlen = get_u32(bytes, 8);
  if (12 + static_cast<std::size_t>(hlen) > bytes.size()) {
    throw InvalidArgument("truncated sequence header");
  }
  SequenceFile out;
  out.header_json = bytes.substr(12, hlen);
  const std::size_t payload = 12 + hlen;
  try {
    const auto h = nlohmann::json::parse(out.header_json);
    const auto n = h.at("n_tokens").get<std::size_t>();
    auto section = [&](const char* key) {
      const auto off = h.at(key).at("offset").get<std::size_t>();
      const auto len = h.at(key).at("length").get<std::size_t>();
      if (payload + off + len > bytes.size()) throw InvalidArgument("truncated payload");
      return std::pair{payload + off, len};
    };
    const auto [tok_at, tok_len] = section("tokens");
    if (tok_len != 4 * n) throw InvalidArgument("token section size mismatch");
    for (std::size_t i = 0; i < n; ++i) out.tokens.push_back(get_u32(bytes, tok_at + 4 * i));
    const auto [mask_at, mask_len] = section("mask");
    out.mask_bits.assign(bytes.begin() + static_cast<std::ptrdiff_t>(mask_at),
                         bytes.begin() + static_cast<std::ptrdiff_t>(mask_at + mask_len));
    const auto [loss_at, loss_len] = section("loss");
    out.loss_bits.assign(bytes.begin() + static_cast<std::ptrdiff_t>(loss_at),
                         bytes.begin() + static_cast<std::ptrdiff_t>(loss_at + loss_len));
    for (const auto& s : h.at("spans")) {
      Span sp;
      sp.kind = s.at("kind").get<std::string>() == "frame" ? SpanKind::kFrame
                                                           : SpanKind::kCaption;
      sp.clip_id = s.at("clip_id").get<ClipId>();
      sp.clip_ordinal = s.at("clip_ordinal").get<std::size_t>();
      sp.clip_final = s.at("clip_final").get<bool>();
      sp.begin = s.at("begin").get<std::size_t>();
      sp.end = s.at("end").get<std::size_t>();
      out.layout.spans.push_back(sp);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad sequence header: ") + e.what());
  }
  return out;
}

SequenceFile read_sequence_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_sequence(bytes);
}

std::vector<std::filesystem::path> write_sequences(const DatagenResult& result,
                                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < result.sequences.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%05zu.bin", i);
    paths.push_back(dir / name);
    write_sequence_file(paths.back(), result.sequences[i]);
  }
  return paths;
}

}  // namespace streamgate
