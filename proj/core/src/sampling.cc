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

#include "lsmooth/sampling.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lsmooth {

namespace {

double log_sum_exp(std::span<const double> xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::size_t index_in(std::span<const TokenId> sorted, TokenId id) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
  if (it == sorted.end() || *it != id) {
    throw Error("ground-truth token " + std::to_string(id) +
                " is not in the substitution vocabulary");
  }
  return static_cast<std::size_t>(it - sorted.begin());
}

void check_sub(std::span<const TokenId> sub) {
  if (sub.empty()) throw Error("empty substitution vocabulary");
  if (!std::is_sorted(sub.begin(), sub.end()) ||
      std::adjacent_find(sub.begin(), sub.end()) != sub.end()) {
    throw Error("substitution vocabulary must be sorted and unique");
  }
}

template <typename Fn>
void enumerate_fillings(const TokenSeq& y_star, std::span<const TokenId> sub,
                        Fn&& visit) {
  const auto positions = content_positions(y_star);
  double count = 1.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    count *= static_cast<double>(sub.size());
  }
  if (count > static_cast<double>(kEnumerationBound)) {
    throw Error("enumeration bound exceeded");
  }
  std::vector<std::size_t> digit(positions.size(), 0);
  TokenSeq y = y_star;
  for (std::size_t i = 0; i < positions.size(); ++i) y[positions[i]] = sub[0];
  while (true) {
    visit(y);
    std::size_t i = 0;
    for (; i < positions.size(); ++i) {
      if (++digit[i] < sub.size()) {
        y[positions[i]] = sub[digit[i]];
        break;
      }
      digit[i] = 0;
      y[positions[i]] = sub[0];
    }
    if (i == positions.size()) break;
  }
}

}  // namespace

void RewardDistParams::validate() const {
  if (!(tau > 0.0)) throw Error("tau must be > 0");
  if (num_samples < 1) throw Error("num_samples must be >= 1");
}

double log_binomial(std::size_t n, std::size_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double DistancePrior::log_partition() const {
  const double alt = std::log(static_cast<double>(sub_size) - 1.0) - 1.0 / tau;
  return static_cast<double>(length) * std::log1p(std::exp(alt));
}

double DistancePrior::mean() const {
  double m = 0.0;
  for (std::size_t d = 0; d < probs.size(); ++d) m += d * probs[d];
  return m;
}

DistancePrior distance_prior(std::size_t length, std::size_t sub_size,
                             double tau) {
  if (length < 1) throw Error("distance_prior: length must be >= 1");
  if (sub_size < 1) throw Error("empty substitution vocabulary");
  if (!(tau > 0.0)) throw Error("tau must be > 0");

  DistancePrior p;
  p.length = length;
  p.sub_size = sub_size;
  p.tau = tau;
  p.log_probs.resize(length + 1);
  const double log_alt = std::log(static_cast<double>(sub_size) - 1.0);
  for (std::size_t d = 0; d <= length; ++d) {
    const double dd = static_cast<double>(d);
    p.log_probs[d] = d == 0 ? 0.0 : log_binomial(length, d) + dd * log_alt - dd / tau;
  }
  const double lse = log_sum_exp(p.log_probs);
  p.probs.resize(length + 1);
  for (std::size_t d = 0; d <= length; ++d) {
    p.log_probs[d] -= lse;
    p.probs[d] = std::exp(p.log_probs[d]);
  }
  return p;
}

const char* to_string(SubVocabKind kind) {
  switch (kind) {
    case SubVocabKind::kFull:
      return "full";
    case SubVocabKind::kRefs:
      return "refs";
    case SubVocabKind::kBatch:
      return "batch";
  }
  return "?";
}

SubVocabKind subvocab_kind_from_string(const std::string& s) {
  if (s == "full") return SubVocabKind::kFull;
  if (s == "refs") return SubVocabKind::kRefs;
  if (s == "batch") return SubVocabKind::kBatch;
  throw Error("unknown subvocab policy '" + s + "'");
}

std::vector<TokenId> resolve_subvocab(SubVocabKind kind, const Example& example,
                                      const Batch* batch, const Vocabulary& v) {
  std::vector<TokenId> out;
  switch (kind) {
    case SubVocabKind::kFull:
      out = v.content_ids();
      break;
    case SubVocabKind::kRefs: {
      std::set<TokenId> ids;
      for (const auto& r : example.references) {
        for (TokenId id : r) {
          if (is_content(id)) ids.insert(id);
        }
      }
      out.assign(ids.begin(), ids.end());
      break;
    }
    case SubVocabKind::kBatch: {
      if (batch == nullptr) throw Error("batch subvocab requires a batch");
      const bool member =
          std::any_of(batch->examples.begin(), batch->examples.end(),
                      [&](const Example& e) { return e.id == example.id; });
      if (!member) throw Error("example is not part of the batch");
      for (TokenId id : batch->batch_vocab) {
        if (is_content(id)) out.push_back(id);
      }
      break;
    }
  }
  if (out.size() < 2) {
    throw Error(std::string("substitution vocabulary '") + to_string(kind) +
                "' has fewer than 2 tokens");
  }
  return out;
}

std::vector<std::size_t> content_positions(const TokenSeq& seq) {
  std::vector<std::size_t> pos;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (is_content(seq[t])) pos.push_back(t);
  }
  return pos;
}

double stratified_log_density(const DistancePrior& prior, std::size_t d) {
  if (d == 0) return prior.log_probs.at(0);
  return prior.log_probs.at(d) - log_binomial(prior.length, d) -
         static_cast<double>(d) *
             std::log(static_cast<double>(prior.sub_size) - 1.0);
}

WeightedSample stratified_sample(const TokenSeq& y_star, double tau,
                                 std::span<const TokenId> sub, Rng& rng) {
  check_sub(sub);
  WeightedSample s;
  s.sequence = y_star;
  s.weight = 1.0;
  std::vector<std::size_t> positions = content_positions(y_star);
  const std::size_t length = positions.size();
  if (length == 0) return s;
  for (std::size_t t : positions) index_in(sub, y_star[t]);

  const DistancePrior prior = distance_prior(length, sub.size(), tau);

  // Inverse-CDF draw of the distance.
  const double u = rng.uniform();
  double cdf = 0.0;
  std::size_t d = 0;
  for (; d < length; ++d) {
    cdf += prior.probs[d];
    if (u < cdf) break;
  }
  // Rounding can leave u beyond the accumulated mass; fall back to the
  // largest distance with nonzero probability.
  while (d > 0 && prior.probs[d] == 0.0) --d;

  // Uniform d-subset of the editable positions.
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t j = i + rng.below(length - i);
    std::swap(positions[i], positions[j]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t t = positions[i];
    const std::size_t gt = index_in(sub, y_star[t]);
    std::size_t k = rng.below(sub.size() - 1);
    if (k >= gt) ++k;
    s.sequence[t] = sub[k];
  }
  s.distance = d;
  s.log_q = stratified_log_density(prior, d);
  s.reward = -static_cast<double>(d);
  return s;
}

std::vector<WeightedSample> stratified_samples(const TokenSeq& y_star,
                                               double tau,
                                               std::span<const TokenId> sub,
                                               std::size_t num_samples,
                                               Rng& rng) {
  if (num_samples < 1) throw Error("num_samples must be >= 1");
  std::vector<WeightedSample> out;
  out.reserve(num_samples);
  for (std::size_t l = 0; l < num_samples; ++l) {
    out.push_back(stratified_sample(y_star, tau, sub, rng));
    out.back().weight = 1.0 / static_cast<double>(num_samples);
  }
  return out;
}

std::vector<WeightedSample> importance_sample(const std::vector<TokenSeq>& refs,
                                              const RewardDistParams& params,
                                              const HammingProposal& proposal,
                                              Rng& rng) {
  params.validate();
  if (refs.empty()) throw Error("importance_sample: no references");

  std::vector<TokenSeq> scored_refs = refs;
  if (params.reward.kind() == RewardKind::kBleu4 && !params.reward.multi_ref() &&
      refs.size() > 1) {
    scored_refs = {refs[rng.below(refs.size())]};
  }

  std::vector<WeightedSample> out;
  out.reserve(params.num_samples);
  std::vector<double> log_w(params.num_samples);
  for (std::size_t l = 0; l < params.num_samples; ++l) {
    WeightedSample s =
        stratified_sample(refs.front(), proposal.tau, proposal.sub, rng);
    s.reward = params.reward(s.sequence, scored_refs);
    log_w[l] = s.reward / params.tau - s.log_q;
    out.push_back(std::move(s));
  }
  const double lse = log_sum_exp(log_w);
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l].weight = std::exp(log_w[l] - lse);
  }
  return out;
}

std::map<TokenSeq, double> enumerate_reward_mass(
    const std::vector<TokenSeq>& refs, const RewardDistParams& params,
    std::span<const TokenId> sub) {
  if (!(params.tau > 0.0)) throw Error("tau must be > 0");
  if (refs.empty()) throw Error("exact_reward_distribution: no references");
  std::map<TokenSeq, double> mass;
  enumerate_fillings(refs.front(), sub, [&](const TokenSeq& y) {
    mass.emplace(y, std::exp(params.reward(y, refs) / params.tau));
  });
  return mass;
}

std::map<TokenSeq, double> exact_reward_distribution(
    const std::vector<TokenSeq>& refs, const RewardDistParams& params,
    std::span<const TokenId> sub) {
  if (!(params.tau > 0.0)) throw Error("tau must be > 0");
  if (refs.empty()) throw Error("exact_reward_distribution: no references");
  std::vector<TokenSeq> seqs;
  std::vector<double> logits;
  enumerate_fillings(refs.front(), sub, [&](const TokenSeq& y) {
    seqs.push_back(y);
    logits.push_back(params.reward(y, refs) / params.tau);
  });
  const double lse = log_sum_exp(logits);
  std::map<TokenSeq, double> dist;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    dist.emplace(std::move(seqs[i]), std::exp(logits[i] - lse));
  }
  return dist;
}

}  // namespace lsmooth
