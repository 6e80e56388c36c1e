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

#include "cli/commands.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>

#include "json.hpp"
#include "lsmooth/checkpoint.h"
#include "lsmooth/corpus.h"
#include "lsmooth/metrics.h"
#include "lsmooth/random.h"
#include "lsmooth/sampling.h"
#include "lsmooth/token_smooth.h"
#include "lsmooth/trainer.h"

namespace lsmooth::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Root-seed streams; the trainer itself uses 1 and 2.
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kEmbeddingStream = 4;
constexpr std::uint64_t kAugmentStream = 5;
constexpr std::uint64_t kSamplerCheckStream = 6;

std::string prepare_out(const ExperimentConfig& config, const std::string& out_dir) {
  const std::string dir = out_dir.empty() ? "." : out_dir;
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "config.json");
  os << config_to_json(config) << '\n';
  if (!os) throw Error("cannot write config.json in '" + dir + "'");
  return dir;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream os(fs::path(dir) / name, std::ios::binary);
  if (!os) throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
  return os;
}

const std::string& require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string(key) + " is required");
  return value;
}

Vocabulary vocab_for(const ExperimentConfig& config,
                     const std::vector<RawExample>& raw) {
  if (!config.paths.vocab.empty()) return Vocabulary::load(config.paths.vocab);
  return build_vocabulary(corpus_token_stream(raw), config.min_count);
}

std::vector<std::string> token_strings(const Vocabulary& v, const TokenSeq& seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (TokenId id : seq) out.push_back(v.token(id));
  return out;
}

RewardFn reward_for(const LossConfig& loss, const std::vector<Example>& data) {
  switch (loss.reward) {
    case RewardKind::kHamming:
      return RewardFn::hamming();
    case RewardKind::kBleu4:
      return RewardFn::bleu4(loss.multi_ref);
    case RewardKind::kCider: {
      std::vector<std::vector<TokenSeq>> refs;
      for (const auto& ex : data) refs.push_back(ex.references);
      return RewardFn::cider(build_idf(refs));
    }
  }
  return RewardFn::hamming();
}

}  // namespace

void cmd_build_vocab(const ExperimentConfig& config, const std::string& out_dir,
                     std::ostream& log) {
  const auto raw = read_corpus(require_path(config.paths.corpus, "paths.corpus"));
  const auto stream = corpus_token_stream(raw);
  const Vocabulary v = build_vocabulary(stream, config.min_count);
  const std::string dir = prepare_out(config, out_dir);
  auto os = open_out(dir, "vocab.txt");
  v.save(os);

  std::uint64_t total = 0, covered = 0;
  for (const auto& line : stream) {
    for (const auto& tok : line) {
      ++total;
      covered += v.contains(tok);
    }
  }
  const double coverage = total ? static_cast<double>(covered) / total : 0.0;
  const json stats = {{"vocab_size", v.size()},
                      {"content_tokens", v.size() - kNumSpecial},
                      {"corpus_tokens", total},
                      {"coverage", coverage}};
  open_out(dir, "vocab_stats.json") << stats.dump(2) << '\n';
  log << "vocab_size " << v.size() << "\n"
      << "corpus_tokens " << total << "\n"
      << "coverage " << coverage << "\n";
}

void cmd_augment(const ExperimentConfig& config, const std::string& out_dir,
                 std::ostream& log) {
  const auto raw = read_corpus(require_path(config.paths.corpus, "paths.corpus"));
  const Vocabulary v = vocab_for(config, raw);
  const auto data = encode_corpus(v, raw, config.max_len);
  const LossConfig& loss = config.train.loss;
  const std::uint64_t seed = config.train.seed;

  const RewardDistParams target{loss.tau_seq, reward_for(loss, data),
                                loss.num_samples};
  const auto batches = make_batches(data, config.train.batch_size,
                                    derive_seed(seed, {kAugmentStream, 0}));
  std::map<std::size_t, std::vector<WeightedSample>> by_example;
  for (const Batch& batch : batches) {
    for (const Example& ex : batch.examples) {
      Rng rng(derive_seed(seed, {kAugmentStream, 1, ex.id}));
      const auto sub = resolve_subvocab(loss.subvocab, ex, &batch, v);
      if (loss.reward == RewardKind::kHamming) {
        by_example[ex.id] =
            stratified_samples(ex.target, loss.tau_seq, sub, loss.num_samples, rng);
      } else {
        by_example[ex.id] = importance_sample(ex.references, target,
                                              {loss.tau_proposal, sub}, rng);
      }
    }
  }

  const std::string dir = prepare_out(config, out_dir);
  auto os = open_out(dir, "samples.jsonl");
  std::size_t count = 0;
  double distance = 0.0;
  for (const auto& [id, samples] : by_example) {
    for (const auto& s : samples) {
      const json rec = {{"example_id", id},
                        {"sample", token_strings(v, s.sequence)},
                        {"distance", s.distance},
                        {"log_q", s.log_q},
                        {"reward", s.reward},
                        {"weight", s.weight}};
      os << rec.dump() << '\n';
      ++count;
      distance += static_cast<double>(s.distance);
    }
  }
  log << "examples " << by_example.size() << "\n"
      << "samples " << count << "\n"
      << "mean_distance " << (count ? distance / count : 0.0) << "\n";
}

void cmd_train(const ExperimentConfig& config, const std::string& out_dir,
               std::ostream& log) {
  const auto raw = read_corpus(require_path(config.paths.corpus, "paths.corpus"));
  const Vocabulary v = vocab_for(config, raw);
  const auto train_set = encode_corpus(v, raw, config.max_len);
  std::vector<Example> valid_set;
  if (!config.paths.valid.empty()) {
    valid_set = encode_corpus(v, read_corpus(config.paths.valid), config.max_len);
  }
  const std::uint64_t seed = config.train.seed;

  std::shared_ptr<const EmbeddingTable> emb;
  if (config.train.loss.uses_token_smoothing()) {
    if (!config.paths.embeddings.empty()) {
      auto table = load_embeddings(config.paths.embeddings, v,
                                   derive_seed(seed, {kEmbeddingStream}));
      for (const auto& w : table.warnings) log << "warning: " << w << "\n";
      emb = std::make_shared<const EmbeddingTable>(std::move(table));
    } else {
      log << "warning: no embeddings file; token smoothing uses random vectors\n";
      emb = std::make_shared<const EmbeddingTable>(random_embeddings(
          v, config.random_embedding_dim, derive_seed(seed, {kEmbeddingStream})));
    }
  }

  const Model init = Model::random({v.size(), config.embed_dim, config.hidden_dim},
                                   derive_seed(seed, {kInitStream}), config.init_scale);
  const std::string dir = prepare_out(config, out_dir);
  auto report = open_out(dir, "report.csv");
  write_report_header(report);
  const TrainResult result =
      train(init, train_set, valid_set, v, emb, config.train,
            [&](const StepReport& row) { write_report_row(report, row); });

  for (const auto& e : result.epochs) {
    log << "epoch " << e.epoch << " train_loss " << e.train_loss;
    if (e.valid_metric) log << " valid " << *e.valid_metric;
    log << "\n";
  }
  save_checkpoint((fs::path(dir) / "model.ckpt").string(), result.model,
                  config_to_json(config, -1));
  auto vos = open_out(dir, "vocab.txt");
  v.save(vos);
  log << "best_epoch " << result.best_epoch << "\n";
}

void cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir,
                  std::ostream& log) {
  const auto raw = read_corpus(require_path(config.paths.corpus, "paths.corpus"));
  const bool use_model = config.hypotheses == "model";
  std::optional<Checkpoint> ckpt;
  std::optional<Vocabulary> vocab;
  if (use_model) {
    const std::string& path = require_path(config.paths.checkpoint, "paths.checkpoint");
    if (!fs::exists(path)) throw Error("missing checkpoint '" + path + "'");
    ckpt = load_checkpoint(path);
    std::string vpath = config.paths.vocab;
    if (vpath.empty()) vpath = (fs::path(path).parent_path() / "vocab.txt").string();
    vocab = Vocabulary::load(vpath);
    if (vocab->size() != ckpt->model.config().vocab_size) {
      throw Error("vocabulary size does not match the checkpoint");
    }
  } else {
    vocab = vocab_for(config, raw);
  }
  const Vocabulary& v = *vocab;
  const auto data = encode_corpus(v, raw, config.max_len);

  std::vector<std::vector<TokenSeq>> ref_corpus;
  for (const auto& ex : data) ref_corpus.push_back(ex.references);
  const IdfTable idf = build_idf(ref_corpus);

  const std::string dir = prepare_out(config, out_dir);
  auto decodes = open_out(dir, "decodes.txt");
  std::vector<std::pair<TokenSeq, std::vector<TokenSeq>>> pairs;
  double sum_bleu = 0.0, sum_cider = 0.0, sum_len = 0.0, sum_penalty = 0.0;
  for (const auto& ex : data) {
    const TokenSeq hyp =
        use_model ? beam_search(ckpt->model, ex.source, config.train.beam_size,
                                config.train.max_decode_len)
                  : ex.target;
    const TokenSeq h = strip_markers(hyp);
    std::vector<TokenSeq> refs;
    double penalty = 0.0;
    for (const auto& r : ex.references) {
      refs.push_back(strip_markers(r));
      const double delta = static_cast<double>(h.size()) - refs.back().size();
      penalty += std::exp(-delta * delta / (2.0 * kCiderSigma * kCiderSigma));
    }
    sum_bleu += sentence_bleu4(h, refs);
    sum_cider += cider(h, refs, idf);
    sum_len += static_cast<double>(h.size());
    sum_penalty += penalty / static_cast<double>(refs.size());
    decodes << join_tokens(decode(v, hyp)) << '\n';
    pairs.emplace_back(h, std::move(refs));
  }
  const double n = static_cast<double>(data.size());
  const json metrics = {{"num_examples", data.size()},
                        {"hypotheses", config.hypotheses},
                        {"beam_size", config.train.beam_size},
                        {"corpus_bleu4", corpus_bleu4(pairs)},
                        {"mean_sentence_bleu4", sum_bleu / n},
                        {"mean_cider", sum_cider / n},
                        {"mean_length", sum_len / n},
                        {"mean_length_penalty", sum_penalty / n}};
  open_out(dir, "metrics.json") << metrics.dump(2) << '\n';
  log << metrics.dump(2) << "\n";
}

void cmd_sampler_check(const ExperimentConfig& config,
                       const std::string& out_dir, std::ostream& log) {
  const SamplerCheckConfig& sc = config.sampler_check;
  if (std::pow(static_cast<double>(sc.sub_size), static_cast<double>(sc.length)) >
      static_cast<double>(kEnumerationBound)) {
    throw ConfigError("sampler_check instance too large: sub_size^length exceeds " +
                      std::to_string(kEnumerationBound));
  }
  std::vector<TokenId> sub;
  for (std::size_t i = 0; i < sc.sub_size; ++i) sub.push_back(static_cast<TokenId>(kNumSpecial + i));
  TokenSeq y_star;
  for (std::size_t t = 0; t < sc.length; ++t) y_star.push_back(sub[t % sub.size()]);
  y_star.push_back(kEosId);

  const RewardDistParams params{sc.tau, RewardFn::hamming(), 1};
  const auto exact = exact_reward_distribution({y_star}, params, sub);
  const DistancePrior prior = distance_prior(sc.length, sc.sub_size, sc.tau);

  Rng rng(derive_seed(config.train.seed, {kSamplerCheckStream}));
  std::map<TokenSeq, std::uint64_t> counts;
  double mean_distance = 0.0;
  for (std::size_t i = 0; i < sc.draws; ++i) {
    const auto s = stratified_sample(y_star, sc.tau, sub, rng);
    ++counts[s.sequence];
    mean_distance += static_cast<double>(s.distance);
  }
  mean_distance /= static_cast<double>(sc.draws);

  double tv = 0.0;
  std::vector<std::map<TokenSeq, std::uint64_t>> strata(sc.length + 1);
  for (const auto& [seq, p] : exact) {
    const auto it = counts.find(seq);
    const std::uint64_t c = it == counts.end() ? 0 : it->second;
    tv += std::abs(static_cast<double>(c) / sc.draws - p);
    strata[hamming(seq, y_star)][seq] = c;
  }
  tv *= 0.5;

  json chi = json::array();
  for (std::size_t d = 1; d <= sc.length; ++d) {
    const auto& cells = strata[d];
    std::uint64_t total = 0;
    for (const auto& kv : cells) total += kv.second;
    json rec = {{"distance", d}, {"cells", cells.size()}, {"draws", total}};
    if (cells.size() > 1 && total > 0) {
      const double expected = static_cast<double>(total) / cells.size();
      double stat = 0.0;
      for (const auto& kv : cells) {
        const double diff = static_cast<double>(kv.second) - expected;
        stat += diff * diff / expected;
      }
      const boost::math::chi_squared dist(static_cast<double>(cells.size() - 1));
      rec["chi_square"] = stat;
      rec["p_value"] = boost::math::cdf(boost::math::complement(dist, stat));
    } else {
      rec["chi_square"] = nullptr;
      rec["p_value"] = nullptr;
    }
    chi.push_back(rec);
  }

  double z = 0.0;
  for (const auto& [seq, m] : enumerate_reward_mass({y_star}, params, sub)) z += m;
  double prior_sum = 0.0;
  for (double p : prior.probs) prior_sum += p;

  const json report = {{"length", sc.length},
                       {"sub_size", sc.sub_size},
                       {"tau", sc.tau},
                       {"draws", sc.draws},
                       {"total_variation", tv},
                       {"strata", chi},
                       {"partition_enumerated", z},
                       {"partition_closed_form", std::exp(prior.log_partition())},
                       {"partition_residual", std::abs(z - std::exp(prior.log_partition()))},
                       {"prior_sum_residual", std::abs(prior_sum - 1.0)},
                       {"prior", prior.probs},
                       {"mean_distance_expected", prior.mean()},
                       {"mean_distance_empirical", mean_distance}};
  const std::string dir = prepare_out(config, out_dir);
  open_out(dir, "sampler_check.json") << report.dump(2) << '\n';
  log << report.dump(2) << "\n";
}

}  // namespace lsmooth::cli
