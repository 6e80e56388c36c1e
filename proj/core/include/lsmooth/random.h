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

#ifndef LSMOOTH_RANDOM_H_
#define LSMOOTH_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lsmooth {

// Mixes a root seed with a path of stream ids (command, epoch, batch,
// example, ...) into an independent 64-bit seed. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path);

// Portable generator: mt19937_64 is fully specified by the standard but the
// <random> distributions are not, so the draws below are hand-rolled to keep
// results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace lsmooth

#endif  // LSMOOTH_RANDOM_H_
