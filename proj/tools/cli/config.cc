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

#include "cli/config.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lsmooth::cli {
namespace {

using nlohmann::json;

json to_json(const ExperimentConfig& c) {
  const LossConfig& l = c.train.loss;
  const OptimizerConfig& o = c.train.optimizer;
  return {
      {"paths",
       {{"corpus", c.paths.corpus},
        {"valid", c.paths.valid},
        {"embeddings", c.paths.embeddings},
        {"vocab", c.paths.vocab},
        {"checkpoint", c.paths.checkpoint}}},
      {"vocab", {{"min_count", c.min_count}, {"max_len", c.max_len}}},
      {"model",
       {{"embed_dim", c.embed_dim},
        {"hidden_dim", c.hidden_dim},
        {"init_scale", c.init_scale},
        {"random_embedding_dim", c.random_embedding_dim}}},
      {"loss",
       {{"kind", to_string(l.kind)},
        {"alpha", l.mix.alpha},
        {"alpha1", l.mix.alpha1},
        {"alpha2", l.mix.alpha2},
        {"gamma", l.mix.gamma},
        {"lazy", l.mix.lazy},
        {"reward", to_string(l.reward)},
        {"multi_ref", l.multi_ref},
        {"subvocab", to_string(l.subvocab)},
        {"tau_seq", l.tau_seq},
        {"tau_proposal", l.tau_proposal},
        {"num_samples", l.num_samples},
        {"tau_tok", l.token.tau},
        {"beta", l.token.beta},
        {"top_k", l.token.top_k}}},
      {"optimizer",
       {{"learning_rate", o.learning_rate},
        {"decay", o.decay},
        {"decay_every", o.decay_every},
        {"decay_start", o.decay_start},
        {"clip_norm", o.clip_norm},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"epsilon", o.epsilon}}},
      {"run",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"early_stop", to_string(c.train.early_stop)},
        {"patience", c.train.patience},
        {"beam_size", c.train.beam_size},
        {"max_decode_len", c.train.max_decode_len},
        {"hypotheses", c.hypotheses}}},
      {"sampler_check",
       {{"length", c.sampler_check.length},
        {"sub_size", c.sampler_check.sub_size},
        {"tau", c.sampler_check.tau},
        {"draws", c.sampler_check.draws}}},
  };
}

// Copies `src` over `dst`, rejecting keys absent from `dst`.
void merge(json& dst, const json& src, const std::string& where) {
  if (!src.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : src.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!dst.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (dst[key].is_object()) {
      merge(dst[key], value, path);
    } else {
      dst[key] = value;
    }
  }
}

template <typename T>
T field(const json& j, const char* section, const char* key) {
  const json& v = j.at(section).at(key);
  const std::string path = std::string(section) + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                    v.get<std::int64_t>() < 0)) {
      throw ConfigError(path + ": expected a non-negative integer");
    }
    return v.get<T>();
  } else {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<T>();
  }
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  c.paths.corpus = field<std::string>(j, "paths", "corpus");
  c.paths.valid = field<std::string>(j, "paths", "valid");
  c.paths.embeddings = field<std::string>(j, "paths", "embeddings");
  c.paths.vocab = field<std::string>(j, "paths", "vocab");
  c.paths.checkpoint = field<std::string>(j, "paths", "checkpoint");
  c.min_count = field<std::uint64_t>(j, "vocab", "min_count");
  c.max_len = field<std::size_t>(j, "vocab", "max_len");
  c.embed_dim = field<std::size_t>(j, "model", "embed_dim");
  c.hidden_dim = field<std::size_t>(j, "model", "hidden_dim");
  c.init_scale = field<double>(j, "model", "init_scale");
  c.random_embedding_dim = field<std::size_t>(j, "model", "random_embedding_dim");

  LossConfig& l = c.train.loss;
  try {
    l.kind = loss_kind_from_string(field<std::string>(j, "loss", "kind"));
    l.reward = reward_kind_from_string(field<std::string>(j, "loss", "reward"));
    l.subvocab = subvocab_kind_from_string(field<std::string>(j, "loss", "subvocab"));
    c.train.early_stop =
        early_stop_metric_from_string(field<std::string>(j, "run", "early_stop"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  l.mix.alpha = field<double>(j, "loss", "alpha");
  l.mix.alpha1 = field<double>(j, "loss", "alpha1");
  l.mix.alpha2 = field<double>(j, "loss", "alpha2");
  l.mix.gamma = field<double>(j, "loss", "gamma");
  l.mix.lazy = field<bool>(j, "loss", "lazy");
  l.multi_ref = field<bool>(j, "loss", "multi_ref");
  l.tau_seq = field<double>(j, "loss", "tau_seq");
  l.tau_proposal = field<double>(j, "loss", "tau_proposal");
  l.num_samples = field<std::size_t>(j, "loss", "num_samples");
  l.token.tau = field<double>(j, "loss", "tau_tok");
  l.token.beta = field<double>(j, "loss", "beta");
  l.token.top_k = field<std::size_t>(j, "loss", "top_k");

  OptimizerConfig& o = c.train.optimizer;
  o.learning_rate = field<double>(j, "optimizer", "learning_rate");
  o.decay = field<double>(j, "optimizer", "decay");
  o.decay_every = field<std::size_t>(j, "optimizer", "decay_every");
  o.decay_start = field<std::size_t>(j, "optimizer", "decay_start");
  o.clip_norm = field<double>(j, "optimizer", "clip_norm");
  o.beta1 = field<double>(j, "optimizer", "beta1");
  o.beta2 = field<double>(j, "optimizer", "beta2");
  o.epsilon = field<double>(j, "optimizer", "epsilon");

  c.train.epochs = field<std::size_t>(j, "run", "epochs");
  c.train.batch_size = field<std::size_t>(j, "run", "batch_size");
  c.train.seed = field<std::uint64_t>(j, "run", "seed");
  c.train.patience = field<std::size_t>(j, "run", "patience");
  c.train.beam_size = field<std::size_t>(j, "run", "beam_size");
  c.train.max_decode_len = field<std::size_t>(j, "run", "max_decode_len");
  c.hypotheses = field<std::string>(j, "run", "hypotheses");

  c.sampler_check.length = field<std::size_t>(j, "sampler_check", "length");
  c.sampler_check.sub_size = field<std::size_t>(j, "sampler_check", "sub_size");
  c.sampler_check.tau = field<double>(j, "sampler_check", "tau");
  c.sampler_check.draws = field<std::size_t>(j, "sampler_check", "draws");
  return c;
}

json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("override key '" + key + "' must be section.key");
  }
  json patch;
  patch[key.substr(0, dot)][key.substr(dot + 1)] = parse_value(assignment.substr(eq + 1));
  merge(j, patch, "");
}

ExperimentConfig finish(json j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) apply_override(j, o);
  ExperimentConfig c = from_json(j);
  c.validate();
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(min_count >= 1, "vocab.min_count must be >= 1");
  require(max_len >= 1, "vocab.max_len must be >= 1");
  require(embed_dim >= 1, "model.embed_dim must be >= 1");
  require(hidden_dim >= 1, "model.hidden_dim must be >= 1");
  require(init_scale > 0.0, "model.init_scale must be > 0");
  require(random_embedding_dim >= 1, "model.random_embedding_dim must be >= 1");
  require(train.epochs >= 1, "run.epochs must be >= 1");
  require(train.patience >= 1, "run.patience must be >= 1");
  require(hypotheses == "model" || hypotheses == "targets",
          "run.hypotheses must be 'model' or 'targets'");
  require(sampler_check.length >= 1, "sampler_check.length must be >= 1");
  require(sampler_check.sub_size >= 2, "sampler_check.sub_size must be >= 2");
  require(sampler_check.tau > 0.0, "sampler_check.tau must be > 0");
  require(sampler_check.draws >= 1, "sampler_check.draws must be >= 1");
  try {
    train.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
  return to_json(config).dump(indent);
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides) {
  json j = to_json(ExperimentConfig{});
  if (!json_text.empty()) {
    const json file = json::parse(json_text, nullptr, false);
    if (file.is_discarded()) throw ConfigError("config is not valid JSON");
    merge(j, file, "");
  }
  return finish(std::move(j), overrides);
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  return parse_config(text, overrides);
}

}  // namespace lsmooth::cli
