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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace lsmooth::testing {

std::size_t naive_hamming(const TokenSeq& a, const TokenSeq& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d = d + 1;
  }
  return d;
}

std::vector<TokenSeq> all_sequences(const std::vector<TokenId>& alphabet,
                                    std::size_t length) {
  std::vector<TokenSeq> out = {TokenSeq{}};
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<TokenSeq> next;
    for (const auto& prefix : out) {
      for (TokenId a : alphabet) {
        TokenSeq s = prefix;
        s.push_back(a);
        next.push_back(std::move(s));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<double> enumerate_distance_marginal(std::size_t length,
                                                std::size_t vocab, double tau) {
  std::vector<TokenId> alphabet(vocab);
  for (std::size_t i = 0; i < vocab; ++i) alphabet[i] = static_cast<TokenId>(i);
  const TokenSeq truth(length, 0);
  std::vector<double> mass(length + 1, 0.0);
  double z = 0.0;
  for (const auto& y : all_sequences(alphabet, length)) {
    const std::size_t d = naive_hamming(y, truth);
    const double w = std::exp(-static_cast<double>(d) / tau);
    mass[d] += w;
    z += w;
  }
  for (double& m : mass) m /= z;
  return mass;
}

double enumerate_partition(std::size_t length, std::size_t vocab, double tau) {
  std::vector<TokenId> alphabet(vocab);
  for (std::size_t i = 0; i < vocab; ++i) alphabet[i] = static_cast<TokenId>(i);
  const TokenSeq truth(length, 0);
  double z = 0.0;
  for (const auto& y : all_sequences(alphabet, length)) {
    z += std::exp(-static_cast<double>(naive_hamming(y, truth)) / tau);
  }
  return z;
}

Eigen::MatrixXd TableLogProbs::log_probs(const TokenSeq& conditioning) const {
  Eigen::MatrixXd rows(conditioning.size(), vocab_);
  std::uint64_t h = seed_ * 0x9e3779b97f4a7c15ULL + 17;
  for (std::size_t t = 0; t < conditioning.size(); ++t) {
    std::mt19937_64 gen(h);
    std::uniform_real_distribution<double> u(-scale_, scale_);
    Eigen::VectorXd z(vocab_);
    for (std::size_t w = 0; w < vocab_; ++w) z[w] = u(gen);
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    rows.row(t) = (z.array() - lse).matrix().transpose();
    h = (h ^ static_cast<std::uint64_t>(conditioning[t] + 1)) *
        0xbf58476d1ce4e5b9ULL;
  }
  return rows;
}

std::vector<double> finite_difference(std::vector<double>& params,
                                      const std::vector<std::size_t>& coords,
                                      const std::function<double()>& f,
                                      double step) {
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t c : coords) {
    const double orig = params[c];
    params[c] = orig + step;
    const double fp = f();
    params[c] = orig - step;
    const double fm = f();
    params[c] = orig;
    out.push_back((fp - fm) / (2.0 * step));
  }
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace lsmooth::testing
