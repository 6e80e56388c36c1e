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

// lsmooth command-line front end.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.h"
#include "cli/config.h"
#include "json.hpp"
#include "lsmooth/common.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
  std::optional<std::string> corpus, valid, vocab, embeddings, checkpoint, loss;
  std::optional<std::uint64_t> min_count;
  std::optional<std::size_t> epochs, beam_size;
};

void add_string(std::vector<std::string>& overrides, const char* key,
                const std::optional<std::string>& value) {
  if (value) overrides.push_back(std::string(key) + "=" + nlohmann::json(*value).dump());
}

template <typename T>
void add_number(std::vector<std::string>& overrides, const char* key,
                const std::optional<T>& value) {
  if (value) overrides.push_back(std::string(key) + "=" + std::to_string(*value));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lsmooth::cli;
  CLI::App app{"Token- and sequence-level loss smoothing toolkit"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON experiment config");
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--seed", opt.seed, "Root seed");
  app.add_option("--set", opt.set, "Override a config key: section.key=value");
  app.add_option("--corpus", opt.corpus, "Corpus file (source<TAB>ref[<TAB>ref...])");
  app.add_option("--valid", opt.valid, "Validation corpus");
  app.add_option("--vocab", opt.vocab, "Vocabulary file");
  app.add_option("--embeddings", opt.embeddings, "Word vectors in GloVe text format");
  app.add_option("--checkpoint", opt.checkpoint, "Model checkpoint");
  app.add_option("--loss", opt.loss, "mle, mle_entropy, tok, seq or tokseq");
  app.add_option("--min-count", opt.min_count, "Vocabulary frequency threshold");
  app.add_option("--epochs", opt.epochs, "Training epochs");
  app.add_option("--beam-size", opt.beam_size, "Beam width for decoding");

  using Command = void (*)(const ExperimentConfig&, const std::string&, std::ostream&);
  Command command = nullptr;
  const std::vector<std::pair<std::string, Command>> commands = {
      {"build-vocab", cmd_build_vocab},
      {"augment", cmd_augment},
      {"train", cmd_train},
      {"evaluate", cmd_evaluate},
      {"sampler-check", cmd_sampler_check}};
  const std::vector<std::string> help = {
      "Build a vocabulary from a corpus", "Write reward-distribution samples",
      "Train an encoder-decoder", "Decode and score a corpus",
      "Compare the sampler against exact enumeration"};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    app.add_subcommand(commands[i].first, help[i])
        ->fallthrough()
        ->callback([&, i] { command = commands[i].second; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::vector<std::string> overrides;
  add_string(overrides, "paths.corpus", opt.corpus);
  add_string(overrides, "paths.valid", opt.valid);
  add_string(overrides, "paths.vocab", opt.vocab);
  add_string(overrides, "paths.embeddings", opt.embeddings);
  add_string(overrides, "paths.checkpoint", opt.checkpoint);
  add_string(overrides, "loss.kind", opt.loss);
  add_number(overrides, "vocab.min_count", opt.min_count);
  add_number(overrides, "run.epochs", opt.epochs);
  add_number(overrides, "run.beam_size", opt.beam_size);
  add_number(overrides, "run.seed", opt.seed);
  overrides.insert(overrides.end(), opt.set.begin(), opt.set.end());

  ExperimentConfig config;
  try {
    config = opt.config.empty() ? parse_config("{}", overrides)
                                : load_config(opt.config, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    command(config, opt.out, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
