// Copyright 2026 The lsmooth Authors.
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

#ifndef LSMOOTH_COMMON_H_
#define LSMOOTH_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsmooth {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Reserved ids. Every Vocabulary lays these out first, in this order.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr TokenId kNumSpecial = 4;

inline constexpr bool is_special(TokenId id) { return id < kNumSpecial; }
inline constexpr bool is_content(TokenId id) { return id >= kNumSpecial; }

// Raised for contract violations and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when training produces a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsmooth

#endif  // LSMOOTH_COMMON_H_
