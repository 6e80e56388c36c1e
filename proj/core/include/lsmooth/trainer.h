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

#ifndef LSMOOTH_TRAINER_H_
#define LSMOOTH_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsmooth/corpus.h"
#include "lsmooth/losses.h"
#include "lsmooth/metrics.h"
#include "lsmooth/model.h"
#include "lsmooth/sampling.h"
#include "lsmooth/token_smooth.h"

namespace lsmooth {

enum class LossKind { kMle, kMleEntropy, kTok, kSeq, kTokSeq };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

struct LossConfig {
  LossKind kind = LossKind::kMle;
  LossMixParams mix;

  // Sequence-level smoothing.
  RewardKind reward = RewardKind::kHamming;
  bool multi_ref = true;
  SubVocabKind subvocab = SubVocabKind::kFull;
  double tau_seq = 0.9;
  double tau_proposal = 0.9;
  std::size_t num_samples = 1;

  // Token-level smoothing; `token.alpha` is ignored, the mix weights above
  // decide the interpolation.
  TokenSmoothParams token;

  bool uses_samples() const {
    return kind == LossKind::kSeq || kind == LossKind::kTokSeq;
  }
  bool uses_token_smoothing() const {
    return kind == LossKind::kTok || kind == LossKind::kTokSeq;
  }
  void validate() const;
};

// Builds the per-example loss plan: draws samples, attaches token targets.
class LossBuilder {
 public:
  // `embeddings` is required for token smoothing; `idf` for the CIDEr reward.
  LossBuilder(const LossConfig& config, const Vocabulary& vocab,
              std::shared_ptr<const EmbeddingTable> embeddings,
              std::optional<IdfTable> idf = std::nullopt);

  struct Built {
    LossPlan plan;
    std::vector<WeightedSample> samples;
    double mean_distance = 0.0;
  };

  Built build(const Example& example, const Batch& batch, Rng& rng) const;

  const LossConfig& config() const { return config_; }

 private:
  LossConfig config_;
  const Vocabulary& vocab_;
  std::unique_ptr<TokenSmoother> smoother_;
  std::optional<RewardDistParams> target_;
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  // lr *= decay at epoch `decay_start` (0-based) and every `decay_every` after.
  double decay = 1.0;
  std::size_t decay_every = 1;
  std::size_t decay_start = 0;
  double clip_norm = 5.0;  // <= 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  double learning_rate_at(std::size_t epoch) const;
};

enum class EarlyStopMetric { kNone, kLoss, kBleu };

const char* to_string(EarlyStopMetric m);
EarlyStopMetric early_stop_metric_from_string(const std::string& s);

struct TrainConfig {
  LossConfig loss;
  OptimizerConfig optimizer;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  EarlyStopMetric early_stop = EarlyStopMetric::kNone;
  std::size_t patience = 3;
  std::size_t beam_size = 1;
  std::size_t max_decode_len = 20;

  void validate() const;
};

struct StepReport {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double mle_component = 0.0;
  double smooth_component = 0.0;
  double mean_sample_distance = 0.0;
  double mean_entropy = 0.0;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> valid_metric;
  double seconds = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<StepReport> steps;
  std::vector<EpochReport> epochs;
  std::size_t best_epoch = 0;
};

// Adaptive-moment update over the flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(const OptimizerConfig& config, std::size_t num_params);
  void step(std::span<double> params, std::span<const double> grad, double lr);

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

// Scales `grad` so its L2 norm is at most max_norm. Returns the norm before.
double clip_global_norm(std::span<double> grad, double max_norm);

using StepCallback = std::function<void(const StepReport&)>;

// Mini-batch training. The per-batch loss is the mean over examples. Throws
// DivergenceError on a non-finite loss or gradient.
TrainResult train(const Model& init, const std::vector<Example>& train_set,
                  const std::vector<Example>& valid_set,
                  const Vocabulary& vocab,
                  std::shared_ptr<const EmbeddingTable> embeddings,
                  const TrainConfig& config, const StepCallback& on_step = {});

// Mean MLE loss over a dataset.
double mean_mle_loss(const Model& model, const std::vector<Example>& data);

// Fraction of examples whose greedy decode equals the target exactly.
double greedy_sequence_accuracy(const Model& model,
                                const std::vector<Example>& data,
                                std::size_t max_len);

// Corpus BLEU-4 of beam-search decodes against the references.
double decode_corpus_bleu(const Model& model, const std::vector<Example>& data,
                          std::size_t beam_size, std::size_t max_len);

// `step,loss,mle_component,smooth_component,mean_sample_distance,mean_entropy`
void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const StepReport& row);

}  // namespace lsmooth

#endif  // LSMOOTH_TRAINER_H_
