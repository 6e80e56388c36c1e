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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "lsmooth/sampling.h"
#include "support/oracles.h"

namespace lsmooth {
namespace {

using testing::all_sequences;
using testing::enumerate_distance_marginal;
using testing::naive_hamming;

const std::vector<TokenId> kSub4 = {4, 5, 6, 7};

TEST(DistancePrior, HighTemperatureLimit) {
  for (std::size_t v : {2, 3, 7}) {
    const DistancePrior p = distance_prior(1, v, 1e9);
    EXPECT_NEAR(p.probs[0], 1.0 / v, 1e-8);
    EXPECT_NEAR(p.probs[1], (v - 1.0) / v, 1e-8);
  }
}

TEST(DistancePrior, MatchesEnumeratedMarginal) {
  const DistancePrior p = distance_prior(2, 4, 1.0);
  const auto oracle = enumerate_distance_marginal(2, 4, 1.0);
  ASSERT_EQ(p.probs.size(), 3u);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(p.probs[d], oracle[d], 1e-12);
  EXPECT_NEAR(p.probs[0], 0.2260, 5e-5);
  EXPECT_NEAR(p.probs[1], 0.4988, 5e-5);
  EXPECT_NEAR(p.probs[2], 0.2752, 5e-5);
}

TEST(DistancePrior, NormalizedAndClosedForm) {
  for (std::size_t t : {1, 2, 5, 16, 60}) {
    for (std::size_t v : {2, 4, 50, 10000}) {
      for (double tau : {0.05, 0.3, 0.9, 2.0, 50.0}) {
        const DistancePrior p = distance_prior(t, v, tau);
        const double sum = std::accumulate(p.probs.begin(), p.probs.end(), 0.0);
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const double log_z = t * std::log((v - 1.0) * std::exp(-1.0 / tau) + 1.0);
        EXPECT_NEAR(p.log_partition(), log_z, 1e-9 * std::max(1.0, log_z));
        for (std::size_t d = 0; d <= t; ++d) {
          const double lp = std::lgamma(t + 1.0) - std::lgamma(d + 1.0) -
                            std::lgamma(t - d + 1.0) + d * std::log(v - 1.0) -
                            d / tau - log_z;
          EXPECT_NEAR(p.log_probs[d], lp, 1e-9 * std::max(1.0, std::abs(lp)));
        }
      }
    }
  }
  EXPECT_THROW(distance_prior(3, 0, 1.0), Error);
}

TEST(DistancePrior, MarginalOfEnumerationOnGrid) {
  for (std::size_t t = 1; t <= 4; ++t) {
    for (std::size_t v = 2; v <= 5; ++v) {
      for (double tau : {0.3, 0.9, 2.0}) {
        const DistancePrior p = distance_prior(t, v, tau);
        const auto oracle = enumerate_distance_marginal(t, v, tau);
        for (std::size_t d = 0; d <= t; ++d)
          EXPECT_NEAR(p.probs[d], oracle[d], 1e-10);
        EXPECT_NEAR(std::exp(p.log_partition()),
                    testing::enumerate_partition(t, v, tau), 1e-10);
      }
    }
  }
}

Example make_example(std::size_t id, std::vector<TokenSeq> refs) {
  Example ex;
  ex.id = id;
  ex.source = {4, kEosId};
  ex.target = refs.front();
  ex.references = std::move(refs);
  return ex;
}

TEST(SubVocab, Resolution) {
  const TokenId a = 4, b = 5, c = 6;
  std::vector<std::string> tokens = Vocabulary::special_tokens();
  std::vector<std::uint64_t> counts(4, 0);
  for (int i = 0; i < 8; ++i) {
    tokens.push_back("t" + std::to_string(i));
    counts.push_back(1);
  }
  const Vocabulary v = Vocabulary::from_entries(tokens, counts);

  const Example e1 = make_example(0, {{a, b, kEosId}, {b, c, kEosId}});
  EXPECT_EQ(resolve_subvocab(SubVocabKind::kRefs, e1, nullptr, v),
            (std::vector<TokenId>{a, b, c}));
  EXPECT_EQ(resolve_subvocab(SubVocabKind::kFull, e1, nullptr, v).size(), 8u);

  const Example x = make_example(1, {{a, b, kEosId}});
  const Example y = make_example(2, {{c, kEosId}});
  Batch batch{{x, y}, collect_batch_vocab({x, y})};
  EXPECT_EQ(resolve_subvocab(SubVocabKind::kBatch, x, &batch, v),
            (std::vector<TokenId>{a, b, c}));
  EXPECT_THROW(resolve_subvocab(SubVocabKind::kRefs, y, nullptr, v), Error);
  EXPECT_THROW(resolve_subvocab(SubVocabKind::kBatch, e1, &batch, v), Error);

  // Refs within Batch within Full.
  const auto refs = resolve_subvocab(SubVocabKind::kRefs, x, nullptr, v);
  const auto bat = resolve_subvocab(SubVocabKind::kBatch, x, &batch, v);
  const auto full = resolve_subvocab(SubVocabKind::kFull, x, nullptr, v);
  EXPECT_TRUE(std::includes(bat.begin(), bat.end(), refs.begin(), refs.end()));
  EXPECT_TRUE(std::includes(full.begin(), full.end(), bat.begin(), bat.end()));
}

TEST(Stratified, SingleTokenPoolIsDirac) {
  const auto prior = distance_prior(3, 1, 0.9);
  EXPECT_DOUBLE_EQ(prior.probs[0], 1.0);
  EXPECT_DOUBLE_EQ(prior.log_partition(), 0.0);
  Rng rng(4);
  const TokenSeq y_star = {4, 4, kEosId};
  const auto s = stratified_sample(y_star, 0.9, std::vector<TokenId>{4}, rng);
  EXPECT_EQ(s.sequence, y_star);
  EXPECT_EQ(s.distance, 0u);
  EXPECT_DOUBLE_EQ(s.log_q, 0.0);
}

TEST(Stratified, DiracLimit) {
  Rng rng(1);
  const TokenSeq y = {4, 5, 6, 7, kEosId};
  for (int i = 0; i < 200; ++i) {
    const auto s = stratified_sample(y, 1e-6, kSub4, rng);
    EXPECT_EQ(s.sequence, y);
    EXPECT_EQ(s.distance, 0u);
  }
}

TEST(Stratified, ForcedSubstitution) {
  Rng rng(2);
  const std::vector<TokenId> sub = {4, 5};
  const TokenSeq y = {4, 4, 4, kEosId};
  for (int i = 0; i < 500; ++i) {
    const auto s = stratified_sample(y, 2.0, sub, rng);
    EXPECT_EQ(s.sequence.back(), kEosId);
    std::size_t changed = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_TRUE(s.sequence[t] == 4 || s.sequence[t] == 5);
      changed += s.sequence[t] == 5;
    }
    EXPECT_EQ(changed, s.distance);
  }
}

TEST(Stratified, SpecialsStayFixedAndDensityMatches) {
  Rng rng(3);
  const TokenSeq y = {4, kUnkId, 6, 7, kEosId};
  for (int i = 0; i < 300; ++i) {
    const auto s = stratified_sample(y, 1.5, kSub4, rng);
    EXPECT_EQ(s.sequence[1], kUnkId);
    EXPECT_EQ(s.sequence[4], kEosId);
    EXPECT_EQ(naive_hamming(s.sequence, y), s.distance);
    const DistancePrior p = distance_prior(3, 4, 1.5);
    EXPECT_NEAR(s.log_q,
                p.log_probs[s.distance] - log_binomial(3, s.distance) -
                    s.distance * std::log(3.0),
                1e-12);
  }
}

TEST(Stratified, RejectsGroundTruthOutsidePool) {
  Rng rng(4);
  EXPECT_THROW(stratified_sample({9, kEosId}, 1.0, kSub4, rng), Error);
  EXPECT_THROW(stratified_sample({4, kEosId}, 1.0, std::vector<TokenId>{}, rng),
               Error);
}

TEST(Stratified, Reproducible) {
  Rng r1(77), r2(77);
  const TokenSeq y = {4, 5, 6, 7, 4, 5, kEosId};
  const auto a = stratified_samples(y, 0.9, kSub4, 50, r1);
  const auto b = stratified_samples(y, 0.9, kSub4, 50, r2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sequence, b[i].sequence);
    EXPECT_DOUBLE_EQ(a[i].weight, 1.0 / 50);
  }
}

// Exact r(y|y*) for the Hamming reward by enumerating the 64 sequences.
std::map<TokenSeq, double> exact_toy(const TokenSeq& y_star, double tau) {
  std::map<TokenSeq, double> p;
  double z = 0.0;
  for (const auto& y : all_sequences(kSub4, y_star.size())) {
    const double w = std::exp(-static_cast<double>(naive_hamming(y, y_star)) / tau);
    p[y] = w;
    z += w;
  }
  for (auto& [y, w] : p) w /= z;
  return p;
}

TEST(Stratified, TotalVariationAgainstEnumeration) {
  const TokenSeq y_star = {5, 4, 7};
  const auto exact = exact_toy(y_star, 0.9);
  Rng rng(2024);
  std::map<TokenSeq, double> counts;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) counts[stratified_sample(y_star, 0.9, kSub4, rng).sequence] += 1;
  double tv = 0.0;
  for (const auto& [y, p] : exact) {
    const auto it = counts.find(y);
    tv += std::abs((it == counts.end() ? 0.0 : it->second / n) - p);
  }
  EXPECT_EQ(counts.size(), 64u);
  EXPECT_LT(0.5 * tv, 0.01);
}

TEST(Stratified, UniformWithinEachStratum) {
  const TokenSeq y_star = {5, 4, 7};
  Rng rng(99);
  std::map<std::size_t, std::map<TokenSeq, int>> strata;
  for (int i = 0; i < 400000; ++i) {
    const auto s = stratified_sample(y_star, 0.9, kSub4, rng);
    ++strata[s.distance][s.sequence];
  }
  for (std::size_t d = 1; d <= 3; ++d) {
    const std::size_t cells = static_cast<std::size_t>(std::round(
        std::exp(log_binomial(3, d)) * std::pow(3.0, static_cast<double>(d))));
    const auto& obs = strata[d];
    ASSERT_EQ(obs.size(), cells);
    double total = 0.0;
    for (const auto& kv : obs) total += kv.second;
    const double expected = total / cells;
    double stat = 0.0;
    for (const auto& kv : obs) stat += std::pow(kv.second - expected, 2) / expected;
    const boost::math::chi_squared dist(static_cast<double>(cells - 1));
    const double p_value = boost::math::cdf(boost::math::complement(dist, stat));
    EXPECT_GT(p_value, 1e-4) << "stratum " << d;
  }
}

TEST(Importance, SingleSampleHasUnitWeight) {
  Rng rng(5);
  RewardDistParams params{0.5, RewardFn::bleu4(true), 1};
  const auto s = importance_sample({{4, 5, 6, kEosId}}, params,
                                   HammingProposal{0.9, kSub4}, rng);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].weight, 1.0);
}

TEST(Importance, MatchingTargetGivesUniformWeights) {
  Rng rng(6);
  RewardDistParams params{0.9, RewardFn::hamming(), 40};
  const auto s = importance_sample({{4, 5, 6, 7, kEosId}}, params,
                                   HammingProposal{0.9, kSub4}, rng);
  double sum = 0.0;
  for (const auto& w : s) {
    EXPECT_NEAR(w.weight, 1.0 / 40, 1e-12);
    sum += w.weight;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Importance, WeightsAreNormalized) {
  Rng rng(7);
  RewardDistParams params{0.1, RewardFn::bleu4(false), 25};
  for (int i = 0; i < 20; ++i) {
    const auto s = importance_sample({{4, 5, 6, 7, kEosId}, {7, 6, 5, 4, kEosId}},
                                     params, HammingProposal{0.9, kSub4}, rng);
    double sum = 0.0;
    for (const auto& w : s) {
      EXPECT_GE(w.weight, 0.0);
      sum += w.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

// Fixed per-position distribution over the four substitution tokens.
double toy_neg_log_p(const TokenSeq& y) {
  static const double probs[3][4] = {{0.4, 0.3, 0.2, 0.1},
                                     {0.1, 0.6, 0.2, 0.1},
                                     {0.25, 0.25, 0.25, 0.25}};
  double nll = 0.0;
  for (std::size_t t = 0; t < 3; ++t) nll -= std::log(probs[t][y[t] - 4]);
  return nll;
}

TEST(Importance, ConsistentOnBleuToy) {
  const TokenSeq y_star = {4, 5, 6, kEosId};
  const double tau = 0.2;
  double z = 0.0, expectation = 0.0;
  for (const auto& core : all_sequences(kSub4, 3)) {
    TokenSeq y = core;
    y.push_back(kEosId);
    const double w = std::exp(sentence_bleu4(core, {{4, 5, 6}}) / tau);
    z += w;
    expectation += w * toy_neg_log_p(y);
  }
  expectation /= z;

  Rng rng(8);
  RewardDistParams params{tau, RewardFn::bleu4(true), 100000};
  const auto s = importance_sample({y_star}, params, HammingProposal{0.9, kSub4}, rng);
  double estimate = 0.0;
  for (const auto& w : s) estimate += w.weight * toy_neg_log_p(w.sequence);
  EXPECT_LT(std::abs(estimate - expectation) / expectation, 0.01);
}

TEST(Enumeration, DistributionProperties) {
  const TokenSeq y = {4, 6, kEosId};
  const std::vector<TokenId> sub = {4, 5, 6};
  RewardDistParams hot{1e9, RewardFn::hamming(), 1};
  const auto uni = exact_reward_distribution({y}, hot, sub);
  ASSERT_EQ(uni.size(), 9u);
  for (const auto& [seq, p] : uni) EXPECT_NEAR(p, 1.0 / 9, 1e-9);

  RewardDistParams params{0.7, RewardFn::hamming(), 1};
  const auto dist = exact_reward_distribution({y}, params, sub);
  std::vector<double> marginal(3, 0.0);
  for (const auto& [seq, p] : dist) marginal[naive_hamming(seq, y)] += p;
  const DistancePrior prior = distance_prior(2, 3, 0.7);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(marginal[d], prior.probs[d], 1e-12);

  RewardDistParams one{1.0, RewardFn::hamming(), 1};
  double z = 0.0;
  for (const auto& [seq, m] : enumerate_reward_mass({{4, 5, kEosId}}, one, kSub4)) z += m;
  EXPECT_NEAR(z, std::pow(3.0 * std::exp(-1.0) + 1.0, 2), 1e-10);
}

TEST(Enumeration, BoundIsEnforced) {
  TokenSeq y(10, 4);
  y.push_back(kEosId);
  RewardDistParams params{1.0, RewardFn::hamming(), 1};
  EXPECT_THROW(exact_reward_distribution({y}, params, kSub4), Error);
}

}  // namespace
}  // namespace lsmooth
