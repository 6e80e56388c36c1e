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

#ifndef LSMOOTH_LOSSES_H_
#define LSMOOTH_LOSSES_H_

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lsmooth/common.h"
#include "lsmooth/sampling.h"
#include "lsmooth/token_smooth.h"

namespace lsmooth {

// Source of per-position model log-probabilities. Row t of
// log_probs(c) is log p(. | h_t) where h_t is reached by teacher-forcing
// bos, c_1, ..., c_{t-1}; there is one row per token of c.
class LogProbProvider {
 public:
  virtual ~LogProbProvider() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual Eigen::MatrixXd log_probs(const TokenSeq& conditioning) const = 0;
};

struct LossMixParams {
  double alpha = 0.5;
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double gamma = 0.0;
  bool lazy = false;

  void validate() const;
};

// Cross-entropy targets attached to one teacher-forced pass.
struct TargetTerm {
  TokenSeq conditioning;
  Eigen::MatrixXd weights;  // |conditioning| x |V|, nonnegative
};

// Every loss in the family is a weighted sum of cross-entropies against
// target rows, each under the hidden states of some conditioning sequence,
// minus gamma times the model entropy along the reference. A plan is that
// decomposition; the model backpropagates through it directly.
struct LossPlan {
  TokenSeq reference;
  std::vector<TargetTerm> terms;
  double entropy_weight = 0.0;
  // Coefficient on NLL(reference) inside the total; diagnostics only.
  double mle_weight = 1.0;

  // Adds scale * weights under `conditioning`, merging with an existing term
  // that conditions on the same sequence. No-op when scale == 0.
  void add(const TokenSeq& conditioning, const Eigen::MatrixXd& weights,
           double scale = 1.0);
  std::size_t forward_passes() const { return terms.size(); }
};

Eigen::MatrixXd one_hot_rows(const TokenSeq& seq, std::size_t vocab);

using TargetBuilder = std::function<SmoothedTarget(const TokenSeq&)>;

LossPlan mle_plan(const TokenSeq& y_star, std::size_t vocab);
LossPlan entropy_reg_plan(const TokenSeq& y_star, std::size_t vocab,
                          double gamma);
LossPlan token_plan(const TokenSeq& y_star, const SmoothedTarget& smoothed,
                    double alpha);
LossPlan seq_plan(const TokenSeq& y_star,
                  const std::vector<WeightedSample>& samples,
                  std::size_t vocab, double alpha, bool lazy);
LossPlan combined_plan(const TokenSeq& y_star,
                       const std::vector<WeightedSample>& samples,
                       const TargetBuilder& smoothed_builder,
                       std::size_t vocab, double alpha1, double alpha2,
                       bool lazy);

struct LossBreakdown {
  double total = 0.0;
  double mle = 0.0;           // NLL of the reference under its own states
  double mean_entropy = 0.0;  // per-position model entropy along the reference
};

LossBreakdown evaluate_plan(const LossPlan& plan,
                            const LogProbProvider& provider);

// -sum_t log p(y*_t | h*_t).
double mle_loss(const TokenSeq& y_star, const LogProbProvider& provider);

// mle_loss - gamma * sum_t H(p(. | h*_t)).
double entropy_reg_loss(const TokenSeq& y_star, const LogProbProvider& provider,
                        double gamma);

// sum_t CE(alpha * smoothed_t + (1 - alpha) * delta_{y*_t}, p_t).
double token_loss(const TokenSeq& y_star, const LogProbProvider& provider,
                  const SmoothedTarget& smoothed, double alpha);

// (1 - alpha) * mle + alpha * sum_l w_l * NLL(y^l), where NLL(y^l) uses the
// reference states when lazy and the sample's own states otherwise.
double seq_loss(const TokenSeq& y_star,
                const std::vector<WeightedSample>& samples,
                const LogProbProvider& provider, double alpha, bool lazy);

double combined_loss(const TokenSeq& y_star,
                     const std::vector<WeightedSample>& samples,
                     const LogProbProvider& provider,
                     const TargetBuilder& smoothed_builder, double alpha1,
                     double alpha2, bool lazy);

}  // namespace lsmooth

#endif  // LSMOOTH_LOSSES_H_
