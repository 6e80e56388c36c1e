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

#include "lsmooth/losses.h"

#include <cmath>
#include <map>

namespace lsmooth {

namespace {

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(std::string(name) + " must be in [0, 1]");
  }
}

void check_samples(const TokenSeq& y_star,
                   const std::vector<WeightedSample>& samples, bool lazy) {
  if (samples.empty()) throw Error("seq_loss: empty sample list");
  for (const auto& s : samples) {
    if (lazy && s.sequence.size() != y_star.size()) {
      throw Error("lazy smoothing needs samples of the reference length");
    }
    if (!(s.weight >= 0.0)) throw Error("sample weights must be >= 0");
  }
}

}  // namespace

void LossMixParams::validate() const {
  check_unit(alpha, "alpha");
  check_unit(alpha1, "alpha1");
  check_unit(alpha2, "alpha2");
  if (!(gamma >= 0.0)) throw Error("gamma must be >= 0");
}

void LossPlan::add(const TokenSeq& conditioning, const Eigen::MatrixXd& weights,
                   double scale) {
  if (scale == 0.0) return;
  if (static_cast<std::size_t>(weights.rows()) != conditioning.size()) {
    throw Error("target rows do not align with the conditioning sequence");
  }
  for (auto& term : terms) {
    if (term.conditioning == conditioning) {
      if (term.weights.cols() != weights.cols()) {
        throw Error("target row length mismatch");
      }
      term.weights += scale * weights;
      return;
    }
  }
  terms.push_back({conditioning, scale * weights});
}

Eigen::MatrixXd one_hot_rows(const TokenSeq& seq, std::size_t vocab) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(seq.size(), vocab);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t] < 0 || static_cast<std::size_t>(seq[t]) >= vocab) {
      throw Error("token id out of range");
    }
    m(t, seq[t]) = 1.0;
  }
  return m;
}

LossPlan mle_plan(const TokenSeq& y_star, std::size_t vocab) {
  LossPlan plan;
  plan.reference = y_star;
  plan.add(y_star, one_hot_rows(y_star, vocab));
  return plan;
}

LossPlan entropy_reg_plan(const TokenSeq& y_star, std::size_t vocab,
                          double gamma) {
  if (!(gamma >= 0.0)) throw Error("gamma must be >= 0");
  LossPlan plan = mle_plan(y_star, vocab);
  plan.entropy_weight = gamma;
  return plan;
}

LossPlan token_plan(const TokenSeq& y_star, const SmoothedTarget& smoothed,
                    double alpha) {
  check_unit(alpha, "alpha");
  if (static_cast<std::size_t>(smoothed.rows()) != y_star.size()) {
    throw Error("token_loss: smoothed rows do not align with the target");
  }
  const std::size_t vocab = static_cast<std::size_t>(smoothed.cols());
  LossPlan plan;
  plan.reference = y_star;
  plan.mle_weight = 1.0 - alpha;
  plan.add(y_star, one_hot_rows(y_star, vocab), 1.0 - alpha);
  plan.add(y_star, smoothed, alpha);
  return plan;
}

LossPlan seq_plan(const TokenSeq& y_star,
                  const std::vector<WeightedSample>& samples, std::size_t vocab,
                  double alpha, bool lazy) {
  check_unit(alpha, "alpha");
  check_samples(y_star, samples, lazy);
  LossPlan plan;
  plan.reference = y_star;
  plan.mle_weight = 1.0 - alpha;
  plan.add(y_star, one_hot_rows(y_star, vocab), 1.0 - alpha);
  for (const auto& s : samples) {
    plan.add(lazy ? y_star : s.sequence, one_hot_rows(s.sequence, vocab),
             alpha * s.weight);
  }
  return plan;
}

LossPlan combined_plan(const TokenSeq& y_star,
                       const std::vector<WeightedSample>& samples,
                       const TargetBuilder& smoothed_builder, std::size_t vocab,
                       double alpha1, double alpha2, bool lazy) {
  check_unit(alpha1, "alpha1");
  check_unit(alpha2, "alpha2");
  LossPlan plan;
  plan.reference = y_star;
  plan.mle_weight = (1.0 - alpha1) * (1.0 - alpha2);

  const auto tok_mix = [&](const TokenSeq& seq) -> Eigen::MatrixXd {
    Eigen::MatrixXd rows = (1.0 - alpha2) * one_hot_rows(seq, vocab);
    if (alpha2 != 0.0) {
      const SmoothedTarget s = smoothed_builder(seq);
      if (static_cast<std::size_t>(s.rows()) != seq.size() ||
          static_cast<std::size_t>(s.cols()) != vocab) {
        throw Error("combined_loss: smoothed target shape mismatch");
      }
      rows += alpha2 * s;
    }
    return rows;
  };

  plan.add(y_star, tok_mix(y_star), 1.0 - alpha1);
  if (alpha1 != 0.0) {
    check_samples(y_star, samples, lazy);
    for (const auto& s : samples) {
      plan.add(lazy ? y_star : s.sequence, tok_mix(s.sequence),
               alpha1 * s.weight);
    }
  }
  return plan;
}

LossBreakdown evaluate_plan(const LossPlan& plan,
                            const LogProbProvider& provider) {
  LossBreakdown out;
  std::map<TokenSeq, Eigen::MatrixXd> cache;
  const auto rows_for = [&](const TokenSeq& c) -> const Eigen::MatrixXd& {
    auto it = cache.find(c);
    if (it == cache.end()) it = cache.emplace(c, provider.log_probs(c)).first;
    return it->second;
  };

  for (const auto& term : plan.terms) {
    const Eigen::MatrixXd& lp = rows_for(term.conditioning);
    if (lp.rows() != term.weights.rows() || lp.cols() != term.weights.cols()) {
      throw Error("target rows do not match model output shape");
    }
    for (Eigen::Index t = 0; t < lp.rows(); ++t) {
      for (Eigen::Index w = 0; w < lp.cols(); ++w) {
        const double wt = term.weights(t, w);
        if (wt != 0.0) out.total -= wt * lp(t, w);
      }
    }
  }

  const Eigen::MatrixXd& ref = rows_for(plan.reference);
  double entropy = 0.0;
  for (Eigen::Index t = 0; t < ref.rows(); ++t) {
    out.mle -= ref(t, plan.reference[t]);
    for (Eigen::Index w = 0; w < ref.cols(); ++w) {
      const double lp = ref(t, w);
      if (std::isfinite(lp)) entropy -= std::exp(lp) * lp;
    }
  }
  out.total -= plan.entropy_weight * entropy;
  out.mean_entropy =
      ref.rows() ? entropy / static_cast<double>(ref.rows()) : 0.0;
  return out;
}

double mle_loss(const TokenSeq& y_star, const LogProbProvider& provider) {
  return evaluate_plan(mle_plan(y_star, provider.vocab_size()), provider).total;
}

double entropy_reg_loss(const TokenSeq& y_star, const LogProbProvider& provider,
                        double gamma) {
  return evaluate_plan(entropy_reg_plan(y_star, provider.vocab_size(), gamma),
                       provider)
      .total;
}

double token_loss(const TokenSeq& y_star, const LogProbProvider& provider,
                  const SmoothedTarget& smoothed, double alpha) {
  if (static_cast<std::size_t>(smoothed.cols()) != provider.vocab_size()) {
    throw Error("token_loss: row length mismatch");
  }
  return evaluate_plan(token_plan(y_star, smoothed, alpha), provider).total;
}

double seq_loss(const TokenSeq& y_star,
                const std::vector<WeightedSample>& samples,
                const LogProbProvider& provider, double alpha, bool lazy) {
  return evaluate_plan(
             seq_plan(y_star, samples, provider.vocab_size(), alpha, lazy),
             provider)
      .total;
}

double combined_loss(const TokenSeq& y_star,
                     const std::vector<WeightedSample>& samples,
                     const LogProbProvider& provider,
                     const TargetBuilder& smoothed_builder, double alpha1,
                     double alpha2, bool lazy) {
  return evaluate_plan(combined_plan(y_star, samples, smoothed_builder,
                                     provider.vocab_size(), alpha1, alpha2,
                                     lazy),
                       provider)
      .total;
}

}  // namespace lsmooth
