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

#ifndef LSMOOTH_MODEL_H_
#define LSMOOTH_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsmooth/common.h"
#include "lsmooth/losses.h"

namespace lsmooth {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;

  void validate() const;
};

struct TensorInfo {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
};

// Encoder-decoder with one gated recurrent cell on each side and a shared
// token embedding. The encoder's final state initializes the decoder; there
// is no attention. All parameters live in one flat buffer in the order
// reported by tensors().
class Model {
 public:
  explicit Model(const ModelConfig& config);

  // Uniform(-scale, scale) initialization.
  static Model random(const ModelConfig& config, std::uint64_t seed,
                      double scale = 0.08);

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // h_0 = g(x): final encoder state over the source tokens.
  Eigen::VectorXd encode_source(const TokenSeq& source) const;

  // One decoder transition h' = f(h, prev).
  Eigen::VectorXd decoder_step(const Eigen::VectorXd& h, TokenId prev) const;

  // log-softmax of the output projection at state h.
  Eigen::VectorXd output_log_probs(const Eigen::VectorXd& h) const;

  // Row t = log p(. | h_t), h_t from teacher-forcing bos + conditioning.
  Eigen::MatrixXd teacher_forced_logprobs(const Eigen::VectorXd& h0,
                                          const TokenSeq& conditioning) const;

  // Value of `plan` for one example; adds d(value)/d(theta) into `grad`.
  LossBreakdown loss_and_gradient(const TokenSeq& source, const LossPlan& plan,
                                  std::span<double> grad) const;

 private:
  ModelConfig config_;
  std::vector<TensorInfo> tensors_;
  std::vector<double> params_;
};

// LogProbProvider bound to one source sentence.
class ModelLogProbs : public LogProbProvider {
 public:
  ModelLogProbs(const Model& model, const TokenSeq& source);

  std::size_t vocab_size() const override { return model_.config().vocab_size; }
  Eigen::MatrixXd log_probs(const TokenSeq& conditioning) const override;

 private:
  const Model& model_;
  Eigen::VectorXd h0_;
};

struct BeamHypothesis {
  TokenSeq prefix;
  double score = 0.0;
  bool finished = false;
};

// Tokens the decoder may emit: everything except pad and bos.
bool decodable(TokenId id);

// Total order used to rank hypotheses: higher score, then shorter, then
// lexicographically smaller.
bool better_hypothesis(const BeamHypothesis& a, const BeamHypothesis& b);

// Length-capped beam search. Returns the best finished hypothesis, or the
// best unfinished one if nothing reached eos within max_len tokens.
BeamHypothesis beam_search_hypothesis(const Model& model, const TokenSeq& source,
                                      std::size_t beam_size,
                                      std::size_t max_len);
TokenSeq beam_search(const Model& model, const TokenSeq& source,
                     std::size_t beam_size, std::size_t max_len);

TokenSeq greedy_decode(const Model& model, const TokenSeq& source,
                       std::size_t max_len);

// Sum of log-probabilities of `seq` under free-running conditioning on itself.
double sequence_log_prob(const Model& model, const TokenSeq& source,
                         const TokenSeq& seq);

}  // namespace lsmooth

#endif  // LSMOOTH_MODEL_H_
