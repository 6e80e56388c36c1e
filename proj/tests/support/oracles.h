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

// Independent reference computations used by the test suites. Nothing here
// calls into the code path it is used to check.

#ifndef LSMOOTH_TESTS_SUPPORT_ORACLES_H_
#define LSMOOTH_TESTS_SUPPORT_ORACLES_H_

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "lsmooth/common.h"
#include "lsmooth/losses.h"
#include "lsmooth/model.h"

namespace lsmooth::testing {

// Position-by-position mismatch count.
std::size_t naive_hamming(const TokenSeq& a, const TokenSeq& b);

// Distance marginal by enumerating all vocab^length sequences around an
// all-zero ground truth and weighting each by exp(-d/tau).
std::vector<double> enumerate_distance_marginal(std::size_t length,
                                                std::size_t vocab, double tau);

// Sum over vocab^length of exp(-d/tau).
double enumerate_partition(std::size_t length, std::size_t vocab, double tau);

// All sequences over `alphabet` of the given length.
std::vector<TokenSeq> all_sequences(const std::vector<TokenId>& alphabet,
                                    std::size_t length);

// Deterministic pseudo-random model: rows for a conditioning sequence are a
// log-softmax of logits seeded by (seed, conditioning prefix). Row t only
// depends on the prefix c_1..c_{t-1}, like a real autoregressive model.
class TableLogProbs : public LogProbProvider {
 public:
  TableLogProbs(std::size_t vocab, std::uint64_t seed, double scale = 2.0)
      : vocab_(vocab), seed_(seed), scale_(scale) {}
  std::size_t vocab_size() const override { return vocab_; }
  Eigen::MatrixXd log_probs(const TokenSeq& conditioning) const override;

 private:
  std::size_t vocab_;
  std::uint64_t seed_;
  double scale_;
};

// Provider returning fixed rows regardless of the conditioning sequence.
class FixedLogProbs : public LogProbProvider {
 public:
  explicit FixedLogProbs(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}
  std::size_t vocab_size() const override { return rows_.cols(); }
  Eigen::MatrixXd log_probs(const TokenSeq& conditioning) const override {
    return rows_.topRows(conditioning.size());
  }

 private:
  Eigen::MatrixXd rows_;
};

// Central finite differences of f at the given coordinates of `params`.
std::vector<double> finite_difference(std::vector<double>& params,
                                      const std::vector<std::size_t>& coords,
                                      const std::function<double()>& f,
                                      double step);

// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

}  // namespace lsmooth::testing

#endif  // LSMOOTH_TESTS_SUPPORT_ORACLES_H_
