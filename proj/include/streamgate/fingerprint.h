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

// 64-bit FNV-1a over token id sequences. Each id contributes its four bytes
// in little-endian order, so the value is identical on every platform.

#ifndef STREAMGATE_FINGERPRINT_H_
#define STREAMGATE_FINGERPRINT_H_

#include <cstdint>
#include <span>
#include <string_view>

#include "streamgate/types.h"

namespace streamgate {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a_extend(std::uint64_t h, TokenId id) {
  for (int b = 0; b < 4; ++b) {
    h ^= (id >> (8 * b)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fingerprint(std::span<const TokenId> ids,
                                    std::uint64_t h = kFnvOffset) {
  for (TokenId id : ids) h = fnv1a_extend(h, id);
  return h;
}

constexpr std::uint64_t fnv1a_bytes(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace streamgate

#endif  // STREAMGATE_FINGERPRINT_H_
