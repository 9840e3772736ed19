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

// Training-sequence export: frames grouped by ground-truth clip, one caption
// per frame-turn drawn from the clip's first `pool_size` tokenized captions,
// packed into sequences that fit the context budget. The on-disk layout is
// documented in docs/formats.md.

#ifndef STREAMGATE_DATAGEN_H_
#define STREAMGATE_DATAGEN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "streamgate/scam.h"
#include "streamgate/trace.h"

namespace streamgate {

inline constexpr char kSequenceMagic[9] = "SGSEQ001";

struct DatagenConfig {
  int pool_size = 1;
  std::size_t context_budget = kDefaultContextBudget;
  std::uint64_t seed = 0;
};

struct DatagenResult {
  std::vector<InterleavedSequence> sequences;
  std::size_t dropped_frames = 0;
  std::size_t empty_clips = 0;
};

// Throws TraceError when a clip lacks pool_size tokenized captions or does
// not fit the budget on its own, InvalidArgument on a bad config.
DatagenResult build_training_sequences(const Trace& trace, const DatagenConfig& config);

std::vector<std::uint8_t> pack_loss_bits(const LossMask& loss);

std::string encode_sequence(const InterleavedSequence& seq);
void write_sequence_file(const std::filesystem::path& path, const InterleavedSequence& seq);

struct SequenceFile {
  std::string header_json;
  SequenceLayout layout;
  std::vector<TokenId> tokens;
  std::vector<std::uint8_t> mask_bits;
  std::vector<std::uint8_t> loss_bits;
};

// Throws InvalidArgument on a malformed file.
SequenceFile decode_sequence(const std::string& bytes);
SequenceFile read_sequence_file(const std::filesystem::path& path);

// Writes seq_00000.bin, seq_00001.bin, ... and returns the paths.
std::vector<std::filesystem::path> write_sequences(const DatagenResult& result,
                                                   const std::filesystem::path& dir);

}  // namespace streamgate

#endif  // STREAMGATE_DATAGEN_H_
