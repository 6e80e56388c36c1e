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

#ifndef LSMOOTH_CHECKPOINT_H_
#define LSMOOTH_CHECKPOINT_H_

#include <iosfwd>
#include <string>

#include "lsmooth/model.h"

namespace lsmooth {

// Binary checkpoint container, all integers and doubles little-endian:
//
//   char[8]  magic "LSMCKPT1"
//   u32      format version (1)
//   u64      vocab_size, embed_dim, hidden_dim
//   u64      n, then n bytes of config echo (UTF-8 JSON, may be empty)
//   u32      tensor count
//   per tensor, in Model::tensors() order:
//     u32 name length, name bytes, u64 rows, u64 cols,
//     rows*cols f64 values in row-major order
struct Checkpoint {
  Model model;
  std::string config_echo;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& os, const Model& model,
                     const std::string& config_echo);
void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& config_echo);
Checkpoint load_checkpoint(std::istream& is);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lsmooth

#endif  // LSMOOTH_CHECKPOINT_H_
