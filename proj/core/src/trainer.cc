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

#include "lsmooth/trainer.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "lsmooth/random.h"

namespace lsmooth {

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kSampleStream = 2;

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kMle:
      return "mle";
    case LossKind::kMleEntropy:
      return "mle_entropy";
    case LossKind::kTok:
      return "tok";
    case LossKind::kSeq:
      return "seq";
    case LossKind::kTokSeq:
      return "tokseq";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mle") return LossKind::kMle;
  if (s == "mle_entropy") return LossKind::kMleEntropy;
  if (s == "tok") return LossKind::kTok;
  if (s == "seq") return LossKind::kSeq;
  if (s == "tokseq") return LossKind::kTokSeq;
  throw Error("unknown loss '" + s + "'");
}

const char* to_string(EarlyStopMetric m) {
  switch (m) {
    case EarlyStopMetric::kNone:
      return "none";
    case EarlyStopMetric::kLoss:
      return "loss";
    case EarlyStopMetric::kBleu:
      return "bleu";
  }
  return "?";
}

EarlyStopMetric early_stop_metric_from_string(const std::string& s) {
  if (s == "none") return EarlyStopMetric::kNone;
  if (s == "loss") return EarlyStopMetric::kLoss;
  if (s == "bleu") return EarlyStopMetric::kBleu;
  throw Error("unknown early-stopping metric '" + s + "'");
}

void LossConfig::validate() const {
  mix.validate();
  if (!(tau_seq > 0.0)) throw Error("tau_seq must be > 0");
  if (!(tau_proposal > 0.0)) throw Error("tau_proposal must be > 0");
  if (num_samples < 1) throw Error("num_samples must be >= 1");
  TokenSmoothParams t = token;
  t.alpha = 1.0;
  t.validate();
}

LossBuilder::LossBuilder(const LossConfig& config, const Vocabulary& vocab,
                         std::shared_ptr<const EmbeddingTable> embeddings,
                         std::optional<IdfTable> idf)
    : config_(config), vocab_(vocab) {
  config_.validate();
  if (config_.uses_token_smoothing()) {
    if (!embeddings) throw Error("token smoothing requires embeddings");
    TokenSmoothParams p = config_.token;
    p.alpha = 1.0;
    smoother_ = std::make_unique<TokenSmoother>(std::move(embeddings),
                                                vocab.freqs(), p);
  }
  if (config_.uses_samples() && config_.reward != RewardKind::kHamming) {
    RewardDistParams target;
    target.tau = config_.tau_seq;
    target.num_samples = config_.num_samples;
    switch (config_.reward) {
      case RewardKind::kBleu4:
        target.reward = RewardFn::bleu4(config_.multi_ref);
        break;
      case RewardKind::kCider:
        if (!idf) throw Error("idf not initialized");
        target.reward = RewardFn::cider(std::move(*idf));
        break;
      case RewardKind::kHamming:
        break;
    }
    target_ = std::move(target);
  }
}

LossBuilder::Built LossBuilder::build(const Example& example,
                                      const Batch& batch, Rng& rng) const {
  const TokenSeq& y_star = example.target;
  const std::size_t V = vocab_.size();
  Built out;

  if (config_.uses_samples()) {
    const std::vector<TokenId> sub =
        resolve_subvocab(config_.subvocab, example, &batch, vocab_);
    if (target_) {
      out.samples = importance_sample(example.references, *target_,
                                      {config_.tau_proposal, sub}, rng);
    } else {
      out.samples = stratified_samples(y_star, config_.tau_seq, sub,
                                       config_.num_samples, rng);
    }
    double d = 0.0;
    for (const auto& s : out.samples) d += static_cast<double>(s.distance);
    out.mean_distance = d / static_cast<double>(out.samples.size());
  }

  const LossMixParams& mix = config_.mix;
  switch (config_.kind) {
    case LossKind::kMle:
      out.plan = mle_plan(y_star, V);
      break;
    case LossKind::kMleEntropy:
      out.plan = entropy_reg_plan(y_star, V, mix.gamma);
      break;
    case LossKind::kTok:
      out.plan = token_plan(y_star, smoother_->targets(y_star), mix.alpha);
      break;
    case LossKind::kSeq:
      out.plan = seq_plan(y_star, out.samples, V, mix.alpha, mix.lazy);
      break;
    case LossKind::kTokSeq:
      out.plan = combined_plan(
          y_star, out.samples,
          [this](const TokenSeq& s) { return smoother_->targets(s); }, V,
          mix.alpha1, mix.alpha2, mix.lazy);
      break;
  }
  return out;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error("learning_rate must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw Error("decay must be in (0, 1]");
  if (decay_every < 1) throw Error("decay_every must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
}

double OptimizerConfig::learning_rate_at(std::size_t epoch) const {
  if (epoch < decay_start) return learning_rate;
  const std::size_t k = (epoch - decay_start) / decay_every + 1;
  return learning_rate * std::pow(decay, static_cast<double>(k));
}

void TrainConfig::validate() const {
  loss.validate();
  optimizer.validate();
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (beam_size < 1) throw Error("beam_size must be >= 1");
  if (max_decode_len < 1) throw Error("max_decode_len must be >= 1");
}

AdamOptimizer::AdamOptimizer(const OptimizerConfig& config,
                             std::size_t num_params)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad,
                         double lr) {
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

TrainResult train(const Model& init, const std::vector<Example>& train_set,
                  const std::vector<Example>& valid_set,
                  const Vocabulary& vocab,
                  std::shared_ptr<const EmbeddingTable> embeddings,
                  const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  if (train_set.empty()) throw Error("empty dataset");
  if (init.config().vocab_size != vocab.size()) {
    throw Error("model vocab_size does not match the vocabulary");
  }

  std::optional<IdfTable> idf;
  if (config.loss.uses_samples() && config.loss.reward == RewardKind::kCider) {
    std::vector<std::vector<TokenSeq>> refs;
    for (const auto& ex : train_set) refs.push_back(ex.references);
    idf = build_idf(refs);
  }
  const LossBuilder builder(config.loss, vocab, std::move(embeddings),
                            std::move(idf));

  TrainResult result{init, {}, {}, 0};
  Model& model = result.model;
  std::optional<Model> best;
  std::optional<double> best_metric;
  std::size_t since_best = 0;

  AdamOptimizer adam(config.optimizer, model.num_params());
  std::vector<double> grad(model.num_params());
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = config.optimizer.learning_rate_at(epoch);
    const auto batches = make_batches(
        train_set, config.batch_size,
        derive_seed(config.seed, {kShuffleStream, epoch}));
    double epoch_loss = 0.0;

    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Batch& batch = batches[b];
      std::fill(grad.begin(), grad.end(), 0.0);
      StepReport row;
      row.step = step;
      row.epoch = epoch;
      for (std::size_t i = 0; i < batch.examples.size(); ++i) {
        const Example& ex = batch.examples[i];
        Rng rng(derive_seed(config.seed, {kSampleStream, epoch, b, i}));
        const auto built = builder.build(ex, batch, rng);
        const LossBreakdown lb = model.loss_and_gradient(ex.source, built.plan, grad);
        row.loss += lb.total;
        row.mle_component += lb.mle;
        row.smooth_component += lb.total - built.plan.mle_weight * lb.mle;
        row.mean_sample_distance += built.mean_distance;
        row.mean_entropy += lb.mean_entropy;
      }
      const double n = static_cast<double>(batch.examples.size());
      row.loss /= n;
      row.mle_component /= n;
      row.smooth_component /= n;
      row.mean_sample_distance /= n;
      row.mean_entropy /= n;
      for (double& g : grad) g /= n;

      if (!std::isfinite(row.loss) || !all_finite(grad)) {
        throw DivergenceError("training diverged at epoch " +
                              std::to_string(epoch) + ", step " +
                              std::to_string(step) +
                              ": loss=" + std::to_string(row.loss));
      }
      clip_global_norm(grad, config.optimizer.clip_norm);
      adam.step(model.params(), grad, lr);

      epoch_loss += row.loss;
      result.steps.push_back(row);
      if (on_step) on_step(row);
      ++step;
    }

    EpochReport er;
    er.epoch = epoch;
    er.train_loss = epoch_loss / static_cast<double>(batches.size());
    if (config.early_stop != EarlyStopMetric::kNone && !valid_set.empty()) {
      const bool is_loss = config.early_stop == EarlyStopMetric::kLoss;
      const double metric =
          is_loss ? mean_mle_loss(model, valid_set)
                  : decode_corpus_bleu(model, valid_set, config.beam_size,
                                       config.max_decode_len);
      er.valid_metric = metric;
      const bool improved = !best_metric || (is_loss ? metric < *best_metric
                                                     : metric > *best_metric);
      if (improved) {
        best_metric = metric;
        best = model;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      result.best_epoch = epoch;
    }
    er.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    result.epochs.push_back(er);
    if (best_metric && since_best >= config.patience) break;
  }
  if (best) result.model = std::move(*best);
  return result;
}

double mean_mle_loss(const Model& model, const std::vector<Example>& data) {
  if (data.empty()) throw Error("empty dataset");
  double s = 0.0;
  for (const auto& ex : data) {
    s -= sequence_log_prob(model, ex.source, ex.target);
  }
  return s / static_cast<double>(data.size());
}

double greedy_sequence_accuracy(const Model& model,
                                const std::vector<Example>& data,
                                std::size_t max_len) {
  if (data.empty()) throw Error("empty dataset");
  std::size_t hit = 0;
  for (const auto& ex : data) {
    hit += greedy_decode(model, ex.source, max_len) == ex.target;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

double decode_corpus_bleu(const Model& model, const std::vector<Example>& data,
                          std::size_t beam_size, std::size_t max_len) {
  std::vector<std::pair<TokenSeq, std::vector<TokenSeq>>> pairs;
  pairs.reserve(data.size());
  for (const auto& ex : data) {
    std::vector<TokenSeq> refs;
    for (const auto& r : ex.references) refs.push_back(strip_markers(r));
    pairs.emplace_back(
        strip_markers(beam_search(model, ex.source, beam_size, max_len)),
        std::move(refs));
  }
  return corpus_bleu4(pairs);
}

void write_report_header(std::ostream& os) {
  os << "step,loss,mle_component,smooth_component,mean_sample_distance,"
        "mean_entropy\n";
}

void write_report_row(std::ostream& os, const StepReport& row) {
  os << row.step << ',' << std::setprecision(10) << row.loss << ','
     << row.mle_component << ',' << row.smooth_component << ','
     << row.mean_sample_distance << ',' << row.mean_entropy << '\n';
}

}  // namespace lsmooth
