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

#ifndef LSMOOTH_TOOLS_CLI_CONFIG_H_
#define LSMOOTH_TOOLS_CLI_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsmooth/trainer.h"

namespace lsmooth::cli {

// Bad configuration: unknown key, wrong type, or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathsConfig {
  std::string corpus;      // training corpus, or the evaluation set for evaluate
  std::string valid;       // optional validation corpus for early stopping
  std::string embeddings;  // GloVe text file; random vectors when empty
  std::string vocab;       // vocabulary file; built from the corpus when empty
  std::string checkpoint;  // input checkpoint for evaluate
};

struct SamplerCheckConfig {
  std::size_t length = 3;
  std::size_t sub_size = 4;
  double tau = 0.9;
  std::size_t draws = 1000000;
};

struct ExperimentConfig {
  PathsConfig paths;
  std::uint64_t min_count = 1;
  std::size_t max_len = 16;

  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  double init_scale = 0.08;
  // Dimension of the random token-smoothing vectors used without a file.
  std::size_t random_embedding_dim = 50;

  TrainConfig train;
  // evaluate scores model decodes ("model") or the targets themselves.
  std::string hypotheses = "model";
  SamplerCheckConfig sampler_check;

  void validate() const;
};

// Sectioned JSON object with every key present.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

// Loads `path` (may be empty) over the defaults, then applies `overrides`
// of the form section.key=value. Values parse as JSON, else as strings.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {});

}  // namespace lsmooth::cli

#endif  // LSMOOTH_TOOLS_CLI_CONFIG_H_
