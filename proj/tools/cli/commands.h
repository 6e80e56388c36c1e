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

#ifndef LSMOOTH_TOOLS_CLI_COMMANDS_H_
#define LSMOOTH_TOOLS_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>

#include "cli/config.h"

namespace lsmooth::cli {

// Every command writes config.json into `out_dir` (created if missing) and
// prints a short human-readable summary to `log`.

// vocab.txt; reports |V| and token coverage (1 - unk rate) on the corpus.
void cmd_build_vocab(const ExperimentConfig& config, const std::string& out_dir,
                     std::ostream& log);

// samples.jsonl: one record per sample
// {example_id, sample, distance, log_q, reward, weight}.
void cmd_augment(const ExperimentConfig& config, const std::string& out_dir,
                 std::ostream& log);

// model.ckpt, report.csv and vocab.txt.
void cmd_train(const ExperimentConfig& config, const std::string& out_dir,
               std::ostream& log);

// metrics.json and decodes.txt for the corpus in paths.corpus.
void cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir,
                  std::ostream& log);

// sampler_check.json: exact vs empirical distribution on a toy instance.
void cmd_sampler_check(const ExperimentConfig& config,
                       const std::string& out_dir, std::ostream& log);

}  // namespace lsmooth::cli

#endif  // LSMOOTH_TOOLS_CLI_COMMANDS_H_
