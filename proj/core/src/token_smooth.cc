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

#include "lsmooth/token_smooth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "lsmooth/random.h"

namespace lsmooth {

namespace {

Eigen::VectorXd random_unit(std::size_t dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  do {
    for (std::size_t i = 0; i < dim; ++i) v[i] = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

EmbeddingTable::EmbeddingTable(Eigen::MatrixXd vectors,
                               std::vector<bool> present)
    : vectors_(std::move(vectors)), present_(std::move(present)) {
  if (present_.size() != static_cast<std::size_t>(vectors_.rows())) {
    throw Error("embedding table: presence mask size mismatch");
  }
  norms_ = vectors_.rowwise().norm();
  unit_ = Eigen::MatrixXd::Zero(vectors_.rows(), vectors_.cols());
  for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
    if (!present_[i]) continue;
    if (norms_[i] == 0.0) {
      throw Error("embedding for id " + std::to_string(i) + " is a zero vector");
    }
    unit_.row(i) = vectors_.row(i) / norms_[i];
  }
}

bool EmbeddingTable::has(TokenId id) const {
  return id >= 0 && static_cast<std::size_t>(id) < present_.size() &&
         present_[id];
}

Eigen::VectorXd EmbeddingTable::vector(TokenId id) const {
  if (!has(id)) throw Error("no embedding for token id " + std::to_string(id));
  return vectors_.row(id).transpose();
}

double EmbeddingTable::norm(TokenId id) const {
  if (!has(id)) throw Error("no embedding for token id " + std::to_string(id));
  return norms_[id];
}

EmbeddingTable load_embeddings(std::istream& is, const Vocabulary& v,
                               std::uint64_t seed) {
  std::vector<std::vector<double>> rows(v.size());
  std::vector<std::size_t> seen_line(v.size(), 0);
  std::vector<std::string> warnings;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const Tokens fields = split_tokens(line);
    if (fields.empty()) continue;
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        vec.push_back(std::stod(fields[i]));
      } catch (const std::exception&) {
        throw Error("embeddings line " + std::to_string(lineno) +
                    ": bad number '" + fields[i] + "'");
      }
    }
    if (dim == 0) {
      if (vec.empty()) {
        throw Error("embeddings line " + std::to_string(lineno) +
                    ": no vector components");
      }
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw Error("embeddings line " + std::to_string(lineno) +
                  ": dimension " + std::to_string(vec.size()) +
                  " does not match " + std::to_string(dim));
    }
    if (std::all_of(vec.begin(), vec.end(), [](double x) { return x == 0.0; })) {
      throw Error("embeddings line " + std::to_string(lineno) +
                  ": zero vector for '" + fields[0] + "'");
    }
    if (!v.contains(fields[0])) continue;
    const TokenId id = v.id(fields[0]);
    if (is_special(id)) continue;
    if (seen_line[id] != 0) {
      warnings.push_back("duplicate embedding for '" + fields[0] +
                         "' on line " + std::to_string(lineno) +
                         " (previous on line " +
                         std::to_string(seen_line[id]) + "); last one wins");
    }
    seen_line[id] = lineno;
    rows[id] = std::move(vec);
  }
  if (dim == 0) throw Error("embeddings file is empty");

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(v.size(), dim);
  std::vector<bool> present(v.size(), false);
  std::size_t missing = 0;
  for (std::size_t id = kNumSpecial; id < v.size(); ++id) {
    present[id] = true;
    if (!rows[id].empty()) {
      m.row(id) = Eigen::Map<const Eigen::RowVectorXd>(rows[id].data(), dim);
    } else {
      Rng rng(derive_seed(seed, {id}));
      m.row(id) = random_unit(dim, rng).transpose();
      ++missing;
    }
  }
  EmbeddingTable table(std::move(m), std::move(present));
  table.warnings = std::move(warnings);
  if (missing) {
    table.warnings.push_back(std::to_string(missing) +
                             " vocabulary tokens had no vector; using random "
                             "unit vectors");
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& v,
                               std::uint64_t seed) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open embeddings '" + path + "'");
  return load_embeddings(is, v, seed);
}

EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim,
                                 std::uint64_t seed) {
  if (dim == 0) throw Error("embedding dim must be > 0");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(vocab_size, dim);
  std::vector<bool> present(vocab_size, false);
  for (std::size_t id = kNumSpecial; id < vocab_size; ++id) {
    Rng rng(derive_seed(seed, {id}));
    m.row(id) = random_unit(dim, rng).transpose();
    present[id] = true;
  }
  return EmbeddingTable(std::move(m), std::move(present));
}

EmbeddingTable random_embeddings(const Vocabulary& v, std::size_t dim,
                                 std::uint64_t seed) {
  return random_embeddings(v.size(), dim, seed);
}

void TokenSmoothParams::validate() const {
  if (!(tau > 0.0)) throw Error("token smoothing tau must be > 0");
  if (!(beta >= 0.0)) throw Error("token smoothing beta must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error("token smoothing alpha must be in [0, 1]");
  }
}

double token_reward(TokenId y, TokenId y_star, const EmbeddingTable& emb) {
  if (is_special(y) || is_special(y_star)) {
    throw Error("token_reward: special tokens have no embedding");
  }
  if (!emb.has(y) || !emb.has(y_star)) {
    throw Error("token_reward: missing embedding");
  }
  return emb.unit_vectors().row(y).dot(emb.unit_vectors().row(y_star));
}

double token_reward_freq(TokenId y, TokenId y_star, const EmbeddingTable& emb,
                         const std::vector<std::uint64_t>& freq, double beta) {
  const double fy = static_cast<double>(freq.at(y));
  const double fs = static_cast<double>(freq.at(y_star));
  if (fy <= 0.0 || fs <= 0.0) throw Error("token_reward_freq: zero frequency");
  return token_reward(y, y_star, emb) - beta * std::min(fy / fs, fs / fy);
}

Eigen::VectorXd smoothed_token_distribution(
    TokenId y_star, const TokenSmoothParams& params, const EmbeddingTable& emb,
    const std::vector<std::uint64_t>& freq) {
  params.validate();
  const std::size_t vocab = freq.size();
  if (y_star < 0 || static_cast<std::size_t>(y_star) >= vocab) {
    throw Error("smoothed_token_distribution: id out of range");
  }
  Eigen::VectorXd dirac = Eigen::VectorXd::Zero(vocab);
  dirac[y_star] = 1.0;
  if (is_special(y_star)) return dirac;
  if (emb.size() != vocab) {
    throw Error("smoothed_token_distribution: embedding/vocabulary size mismatch");
  }

  const double fs = static_cast<double>(freq[y_star]);
  if (fs <= 0.0) throw Error("token_reward_freq: zero frequency");
  const Eigen::VectorXd cos = emb.unit_vectors() *
                              emb.unit_vectors().row(y_star).transpose();

  std::vector<TokenId> support;
  Eigen::VectorXd logits = Eigen::VectorXd::Constant(
      vocab, -std::numeric_limits<double>::infinity());
  for (std::size_t w = kNumSpecial; w < vocab; ++w) {
    const double fw = static_cast<double>(freq[w]);
    if (fw <= 0.0) throw Error("token_reward_freq: zero frequency");
    const double r = cos[w] - params.beta * std::min(fw / fs, fs / fw);
    logits[w] = r / params.tau;
    support.push_back(static_cast<TokenId>(w));
  }
  if (params.top_k > 0 && params.top_k < support.size()) {
    std::stable_sort(support.begin(), support.end(),
                     [&](TokenId a, TokenId b) { return logits[a] > logits[b]; });
    for (std::size_t i = params.top_k; i < support.size(); ++i) {
      logits[support[i]] = -std::numeric_limits<double>::infinity();
    }
    support.resize(params.top_k);
  }

  double mx = -std::numeric_limits<double>::infinity();
  for (TokenId w : support) mx = std::max(mx, logits[w]);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(vocab);
  double z = 0.0;
  for (TokenId w : support) {
    p[w] = std::exp(logits[w] - mx);
    z += p[w];
  }
  p /= z;
  return params.alpha * p + (1.0 - params.alpha) * dirac;
}

TokenSmoother::TokenSmoother(std::shared_ptr<const EmbeddingTable> emb,
                             std::vector<std::uint64_t> freq,
                             TokenSmoothParams params)
    : emb_(std::move(emb)), freq_(std::move(freq)), params_(params) {
  if (!emb_) throw Error("TokenSmoother: null embedding table");
  params_.validate();
}

Eigen::VectorXd TokenSmoother::row(TokenId y_star) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = cache_.find(y_star);
    if (it != cache_.end()) return it->second;
  }
  Eigen::VectorXd r = smoothed_token_distribution(y_star, params_, *emb_, freq_);
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(y_star, std::move(r)).first->second;
}

SmoothedTarget TokenSmoother::targets(const TokenSeq& seq) const {
  SmoothedTarget out(seq.size(), freq_.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    out.row(t) = row(seq[t]).transpose();
  }
  return out;
}

}  // namespace lsmooth
