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

#ifndef LSMOOTH_TOKEN_SMOOTH_H_
#define LSMOOTH_TOKEN_SMOOTH_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lsmooth/common.h"
#include "lsmooth/corpus.h"

namespace lsmooth {

// Word vectors indexed by token id. Special tokens carry no vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(Eigen::MatrixXd vectors, std::vector<bool> present);

  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  bool has(TokenId id) const;
  Eigen::VectorXd vector(TokenId id) const;
  double norm(TokenId id) const;
  // Rows scaled to unit length; zero rows for specials.
  const Eigen::MatrixXd& unit_vectors() const { return unit_; }

  // Diagnostics gathered while loading (duplicate tokens etc.).
  std::vector<std::string> warnings;

 private:
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd unit_;
  Eigen::VectorXd norms_;
  std::vector<bool> present_;
};

// GloVe text layout: `token v1 ... vD` per line. Vocabulary tokens missing
// from the file receive seeded random unit vectors.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& v,
                               std::uint64_t seed = 0);
EmbeddingTable load_embeddings(std::istream& is, const Vocabulary& v,
                               std::uint64_t seed = 0);

// Seeded random unit vectors for every content token.
EmbeddingTable random_embeddings(const Vocabulary& v, std::size_t dim,
                                 std::uint64_t seed);
EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim,
                                 std::uint64_t seed);

struct TokenSmoothParams {
  double tau = 0.8;
  double beta = 0.1;
  double alpha = 1.0;
  // Keep only the k most similar tokens (0 = full vocabulary).
  std::size_t top_k = 0;

  void validate() const;
};

// Cosine similarity of the two token embeddings.
double token_reward(TokenId y, TokenId y_star, const EmbeddingTable& emb);

// Cosine minus beta * min(freq ratio), which penalizes similar-frequency
// neighbours and so moves mass towards rare tokens.
double token_reward_freq(TokenId y, TokenId y_star, const EmbeddingTable& emb,
                         const std::vector<std::uint64_t>& freq, double beta);

// alpha * softmax_w(r_freq(w, y*)/tau) + (1 - alpha) * delta_{y*} over the
// whole vocabulary; specials get zero mass. Special targets stay a Dirac.
Eigen::VectorXd smoothed_token_distribution(
    TokenId y_star, const TokenSmoothParams& params, const EmbeddingTable& emb,
    const std::vector<std::uint64_t>& freq);

// Per-position targets, one row per token of a sequence.
using SmoothedTarget = Eigen::MatrixXd;

// Memoizes per-token rows; safe to call from several threads.
class TokenSmoother {
 public:
  TokenSmoother(std::shared_ptr<const EmbeddingTable> emb,
                std::vector<std::uint64_t> freq, TokenSmoothParams params);

  const TokenSmoothParams& params() const { return params_; }
  std::size_t vocab_size() const { return freq_.size(); }

  Eigen::VectorXd row(TokenId y_star) const;
  SmoothedTarget targets(const TokenSeq& seq) const;

 private:
  std::shared_ptr<const EmbeddingTable> emb_;
  std::vector<std::uint64_t> freq_;
  TokenSmoothParams params_;
  mutable std::mutex mu_;
  mutable std::unordered_map<TokenId, Eigen::VectorXd> cache_;
};

}  // namespace lsmooth

#endif  // LSMOOTH_TOKEN_SMOOTH_H_
