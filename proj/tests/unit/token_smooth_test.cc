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

#include <cmath>
#include <memory>
#include <sstream>

#include "lsmooth/random.h"
#include "lsmooth/token_smooth.h"

namespace lsmooth {
namespace {

Vocabulary toy_vocab(std::vector<std::string> words,
                     std::vector<std::uint64_t> counts) {
  std::vector<std::string> tokens = Vocabulary::special_tokens();
  std::vector<std::uint64_t> freq(kNumSpecial, 0);
  tokens.insert(tokens.end(), words.begin(), words.end());
  freq.insert(freq.end(), counts.begin(), counts.end());
  return Vocabulary::from_entries(tokens, freq);
}

// Embedding table whose content rows are given explicitly.
EmbeddingTable table_from(const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = rows.front().size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kNumSpecial + rows.size(), dim);
  std::vector<bool> present(kNumSpecial + rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) m(kNumSpecial + i, j) = rows[i][j];
    present[kNumSpecial + i] = true;
  }
  return EmbeddingTable(m, present);
}

TEST(LoadEmbeddings, LoadsKnownAndFillsMissing) {
  const Vocabulary v = toy_vocab({"cat", "dog", "eel"}, {3, 2, 1});
  std::istringstream in(
      "cat 1 0 0 0\n"
      "dog 0 2 0 0\n"
      "fox 0 0 3 0\n");
  const EmbeddingTable emb = load_embeddings(in, v, 5);
  EXPECT_EQ(emb.dim(), 4u);
  EXPECT_EQ(emb.vector(v.id("cat")), Eigen::Vector4d(1, 0, 0, 0));
  EXPECT_EQ(emb.vector(v.id("dog")), Eigen::Vector4d(0, 2, 0, 0));
  EXPECT_TRUE(emb.has(v.id("eel")));
  EXPECT_NEAR(emb.norm(v.id("eel")), 1.0, 1e-12);
  EXPECT_FALSE(emb.has(kEosId));
  EXPECT_FALSE(emb.warnings.empty());

  std::istringstream again("cat 1 0 0 0\ndog 0 2 0 0\nfox 0 0 3 0\n");
  EXPECT_EQ(load_embeddings(again, v, 5).vector(v.id("eel")),
            emb.vector(v.id("eel")));
}

TEST(LoadEmbeddings, DuplicateLastWinsWithWarning) {
  const Vocabulary v = toy_vocab({"cat"}, {1});
  std::istringstream in("cat 1 0\ncat 0 3\n");
  const EmbeddingTable emb = load_embeddings(in, v);
  EXPECT_EQ(emb.vector(v.id("cat")), Eigen::Vector2d(0, 3));
  ASSERT_EQ(emb.warnings.size(), 1u);
  EXPECT_NE(emb.warnings[0].find("cat"), std::string::npos);
}

TEST(LoadEmbeddings, Errors) {
  const Vocabulary v = toy_vocab({"cat", "dog"}, {1, 1});
  std::istringstream dims("cat 1 0\ndog 1 0 0\n");
  try {
    load_embeddings(dims, v);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream zero("cat 0 0\n");
  EXPECT_THROW(load_embeddings(zero, v), Error);
}

TEST(LoadEmbeddings, NormsMatchDotProduct) {
  const Vocabulary v = toy_vocab({"a", "b", "c"}, {1, 1, 1});
  std::istringstream in("a 0.5 -1.25 2\nb 3 4 0\nc -0.1 0.2 -0.3\n");
  const EmbeddingTable emb = load_embeddings(in, v);
  const double raw[3][3] = {{0.5, -1.25, 2}, {3, 4, 0}, {-0.1, 0.2, -0.3}};
  for (int i = 0; i < 3; ++i) {
    double dot = 0.0;
    for (int j = 0; j < 3; ++j) dot += raw[i][j] * raw[i][j];
    EXPECT_NEAR(emb.norm(kNumSpecial + i), std::sqrt(dot), 1e-14);
  }
}

TEST(TokenReward, Examples) {
  const EmbeddingTable emb =
      table_from({{1, 0}, {std::sqrt(2.0) / 2, std::sqrt(2.0) / 2}, {0, 5}});
  EXPECT_NEAR(token_reward(4, 4, emb), 1.0, 1e-15);
  EXPECT_NEAR(token_reward(5, 4, emb), 0.70710678118654752, 1e-15);
  EXPECT_NEAR(token_reward(6, 4, emb), 0.0, 1e-15);
  EXPECT_THROW(token_reward(kEosId, 4, emb), Error);
}

TEST(TokenRewardFreq, Examples) {
  // cos(e4, e5) = 0.4.
  const EmbeddingTable emb = table_from({{1, 0}, {0.4, std::sqrt(1 - 0.16)}});
  const std::vector<std::uint64_t> freq = {0, 0, 0, 0, 1, 100};
  EXPECT_NEAR(token_reward_freq(4, 4, emb, freq, 0.3), 0.7, 1e-15);
  EXPECT_NEAR(token_reward_freq(5, 4, emb, freq, 0.5), 0.395, 1e-15);
  EXPECT_THROW(token_reward_freq(5, 4, emb, {0, 0, 0, 0, 0, 3}, 0.5), Error);

  const Vocabulary v = toy_vocab({"a", "b", "c", "d"}, {5, 9, 2, 7});
  const EmbeddingTable rnd = random_embeddings(v, 6, 3);
  for (TokenId x = 4; x < 8; ++x)
    for (TokenId y = 4; y < 8; ++y)
      EXPECT_DOUBLE_EQ(token_reward_freq(x, y, rnd, v.freqs(), 0.0),
                       token_reward(x, y, rnd));
}

TEST(SmoothedDistribution, IdenticalEmbeddingsGiveUniform) {
  const EmbeddingTable emb = table_from({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
  const std::vector<std::uint64_t> freq = {0, 0, 0, 0, 1, 2, 3, 4};
  const Eigen::VectorXd p = smoothed_token_distribution(5, {0.8, 0.0, 1.0, 0}, emb, freq);
  for (int i = 0; i < kNumSpecial; ++i) EXPECT_EQ(p[i], 0.0);
  for (int i = kNumSpecial; i < 8; ++i) EXPECT_NEAR(p[i], 0.25, 1e-15);
}

TEST(SmoothedDistribution, LowTemperatureIsDirac) {
  const Vocabulary v = toy_vocab({"a", "b", "c", "d"}, {1, 1, 1, 1});
  const EmbeddingTable emb = random_embeddings(v, 5, 1);
  const Eigen::VectorXd p = smoothed_token_distribution(6, {1e-4, 0.0, 1.0, 0}, emb, v.freqs());
  EXPECT_NEAR(p[6], 1.0, 1e-12);
}

TEST(SmoothedDistribution, SpecialTargetsStayDirac) {
  const Vocabulary v = toy_vocab({"a", "b"}, {1, 1});
  const EmbeddingTable emb = random_embeddings(v, 3, 1);
  const Eigen::VectorXd p = smoothed_token_distribution(kEosId, {}, emb, v.freqs());
  EXPECT_EQ(p[kEosId], 1.0);
  EXPECT_EQ(p.sum(), 1.0);
}

TEST(SmoothedDistribution, ToyFiveTokenScalarRecomputation) {
  const std::vector<std::vector<double>> e = {
      {1.0, 0.0}, {0.8, 0.6}, {0.0, 1.0}, {-0.6, 0.8}, {-1.0, -0.2}};
  const EmbeddingTable emb = table_from(e);
  const std::vector<std::uint64_t> freq = {0, 0, 0, 0, 10, 4, 1, 25, 7};
  const double tau = 0.5, beta = 0.2, alpha = 0.7;
  const TokenId target = 5;
  const Eigen::VectorXd got =
      smoothed_token_distribution(target, {tau, beta, alpha, 0}, emb, freq);

  double num[5];
  double z = 0.0;
  const auto& s = e[target - kNumSpecial];
  for (int w = 0; w < 5; ++w) {
    const double dot = e[w][0] * s[0] + e[w][1] * s[1];
    const double cosine = dot / (std::hypot(e[w][0], e[w][1]) * std::hypot(s[0], s[1]));
    const double fw = static_cast<double>(freq[kNumSpecial + w]);
    const double fs = static_cast<double>(freq[target]);
    const double r = cosine - beta * std::min(fw / fs, fs / fw);
    num[w] = std::exp(r / tau);
    z += num[w];
  }
  for (int w = 0; w < 5; ++w) {
    const double dirac = (kNumSpecial + w == target) ? 1.0 : 0.0;
    EXPECT_NEAR(got[kNumSpecial + w], alpha * num[w] / z + (1 - alpha) * dirac, 1e-14);
  }
}

TEST(SmoothedDistribution, RowsSumToOneAndAlphaZeroIsOneHot) {
  const Vocabulary v = toy_vocab({"a", "b", "c", "d", "e", "f"}, {1, 3, 9, 27, 2, 5});
  const EmbeddingTable emb = random_embeddings(v, 4, 9);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    TokenSmoothParams p;
    p.tau = 0.05 + 3.0 * rng.uniform();
    p.beta = rng.uniform();
    p.alpha = rng.uniform();
    p.top_k = rng.below(7);
    const TokenId y = static_cast<TokenId>(kNumSpecial + rng.below(6));
    const Eigen::VectorXd row = smoothed_token_distribution(y, p, emb, v.freqs());
    EXPECT_NEAR(row.sum(), 1.0, 1e-9);
    EXPECT_GE(row.minCoeff(), 0.0);
    p.alpha = 0.0;
    const Eigen::VectorXd hot = smoothed_token_distribution(y, p, emb, v.freqs());
    for (int w = 0; w < hot.size(); ++w) EXPECT_EQ(hot[w], w == y ? 1.0 : 0.0);
  }
}

TEST(SmoothedDistribution, TopKKeepsMostSimilar) {
  const EmbeddingTable emb = table_from({{1, 0}, {0.9, 0.1}, {0, 1}, {-1, 0}});
  const std::vector<std::uint64_t> freq = {0, 0, 0, 0, 1, 1, 1, 1};
  const Eigen::VectorXd p = smoothed_token_distribution(4, {0.5, 0.0, 1.0, 2}, emb, freq);
  EXPECT_GT(p[4], 0.0);
  EXPECT_GT(p[5], 0.0);
  EXPECT_EQ(p[6], 0.0);
  EXPECT_EQ(p[7], 0.0);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

TEST(SmoothedDistribution, MoreSimilarMeansMoreMass) {
  const std::vector<std::uint64_t> freq = {0, 0, 0, 0, 5, 5, 5};
  double previous = 0.0;
  for (double angle = 1.5; angle >= 0.0; angle -= 0.25) {
    const EmbeddingTable emb =
        table_from({{1, 0}, {std::cos(angle), std::sin(angle)}, {0, -1}});
    const double p = smoothed_token_distribution(4, {0.8, 0.1, 1.0, 0}, emb, freq)[5];
    EXPECT_GT(p, previous);
    previous = p;
  }
}

TEST(SmoothedDistribution, FrequencyPenaltyLowersTargetMass) {
  const Vocabulary v = toy_vocab({"a", "b", "c", "d", "e"}, {50, 3, 18, 1, 7});
  const EmbeddingTable emb = random_embeddings(v, 6, 2);
  for (TokenId y : v.content_ids()) {
    const double plain = smoothed_token_distribution(y, {0.8, 0.0, 1.0, 0}, emb, v.freqs())[y];
    const double pen = smoothed_token_distribution(y, {0.8, 0.3, 1.0, 0}, emb, v.freqs())[y];
    EXPECT_LT(pen, plain);
  }
}

TEST(TokenSmoother, CachedRowsMatchDirectComputation) {
  const Vocabulary v = toy_vocab({"a", "b", "c"}, {2, 4, 6});
  auto emb = std::make_shared<const EmbeddingTable>(random_embeddings(v, 3, 6));
  const TokenSmoothParams params{0.6, 0.1, 1.0, 0};
  const TokenSmoother smoother(emb, v.freqs(), params);
  const SmoothedTarget t = smoother.targets({4, 6, 5, kEosId});
  ASSERT_EQ(t.rows(), 4);
  EXPECT_EQ(Eigen::VectorXd(t.row(1).transpose()),
            smoothed_token_distribution(6, params, *emb, v.freqs()));
  EXPECT_EQ(t(3, kEosId), 1.0);
}

}  // namespace
}  // namespace lsmooth
