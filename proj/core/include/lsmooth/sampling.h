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

#ifndef LSMOOTH_SAMPLING_H_
#define LSMOOTH_SAMPLING_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lsmooth/common.h"
#include "lsmooth/corpus.h"
#include "lsmooth/metrics.h"
#include "lsmooth/random.h"

namespace lsmooth {

// Parameters of the exponentiated-payoff distribution r(y|y*) ∝ exp(r/tau).
struct RewardDistParams {
  double tau = 0.9;
  RewardFn reward;
  std::size_t num_samples = 1;

  void validate() const;
};

// Closed-form marginal of the Hamming distance under r(y|y*) when every
// position may take any of `sub_size` values:
//   p(d) = C(T,d) (V-1)^d e^{-d/tau} / ((V-1) e^{-1/tau} + 1)^T.
struct DistancePrior {
  std::size_t length = 0;
  std::size_t sub_size = 0;
  double tau = 0.0;
  std::vector<double> log_probs;
  std::vector<double> probs;

  // log of ((V-1) e^{-1/tau} + 1)^T.
  double log_partition() const;
  double mean() const;
};

DistancePrior distance_prior(std::size_t length, std::size_t sub_size,
                             double tau);

double log_binomial(std::size_t n, std::size_t k);

enum class SubVocabKind { kFull, kRefs, kBatch };

const char* to_string(SubVocabKind kind);
SubVocabKind subvocab_kind_from_string(const std::string& s);

// Substitution pool for one example: sorted content ids. `batch` is only
// consulted for kBatch.
std::vector<TokenId> resolve_subvocab(SubVocabKind kind, const Example& example,
                                      const Batch* batch, const Vocabulary& v);

// Positions of `seq` holding content tokens; these are the editable slots.
std::vector<std::size_t> content_positions(const TokenSeq& seq);

struct WeightedSample {
  TokenSeq sequence;
  double weight = 0.0;
  std::size_t distance = 0;
  double log_q = 0.0;   // proposal log-density of `sequence`
  double reward = 0.0;  // r(sequence, refs) under the target reward
};

// Log-probability of one specific sequence at distance d under the
// stratified sampler: log p(d) - log C(T,d) - d log(V-1).
double stratified_log_density(const DistancePrior& prior, std::size_t d);

// One exact draw from r(y|y*) for the Hamming reward: distance from the
// prior, a uniform d-subset of content positions, and substitutions uniform
// over sub \ {y*_t}.
WeightedSample stratified_sample(const TokenSeq& y_star, double tau,
                                 std::span<const TokenId> sub, Rng& rng);

// L stratified draws with uniform weights 1/L.
std::vector<WeightedSample> stratified_samples(const TokenSeq& y_star,
                                               double tau,
                                               std::span<const TokenId> sub,
                                               std::size_t num_samples,
                                               Rng& rng);

struct HammingProposal {
  double tau = 0.9;
  std::vector<TokenId> sub;
};

// Self-normalized importance sampling for rewards without a tractable
// partition function. `refs.front()` is the ground truth the proposal edits.
// In single-reference mode one reference is drawn from `rng` per call.
std::vector<WeightedSample> importance_sample(const std::vector<TokenSeq>& refs,
                                              const RewardDistParams& params,
                                              const HammingProposal& proposal,
                                              Rng& rng);

inline constexpr std::size_t kEnumerationBound = 1000000;

// Exact normalized r(y|refs) over every sequence obtained by filling the
// content positions of refs.front() from `sub`. Test oracle; small instances.
std::map<TokenSeq, double> exact_reward_distribution(
    const std::vector<TokenSeq>& refs, const RewardDistParams& params,
    std::span<const TokenId> sub);

// Unnormalized version, exp(r/tau) per sequence, for partition checks.
std::map<TokenSeq, double> enumerate_reward_mass(
    const std::vector<TokenSeq>& refs, const RewardDistParams& params,
    std::span<const TokenId> sub);

}  // namespace lsmooth

#endif  // LSMOOTH_SAMPLING_H_
