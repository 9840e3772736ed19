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

#ifndef STREAMGATE_RNG_H_
#define STREAMGATE_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace streamgate {

// Seeded generator with a platform-independent uniform draw. The standard
// distributions are implementation-defined, so draws are derived from the
// raw mt19937_64 output instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent sub-stream derived from a root seed and a stream name
  // ("pool-sampling", "pruning", ...).
  static Rng stream(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// 64-bit SplitMix finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace streamgate

#endif  // STREAMGATE_RNG_H_
