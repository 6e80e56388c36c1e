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

#include "lsmooth/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <type_traits>

#include "lsmooth/random.h"

namespace lsmooth {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MatMap =
    Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const RowMatrix,
                                  RowMatrix>>;
template <typename Scalar>
using VecMap = Eigen::Map<std::conditional_t<
    std::is_const_v<Scalar>, const Eigen::VectorXd, Eigen::VectorXd>>;

enum Tensor { kEmbedding, kEncWx, kEncWh, kEncB, kDecWx, kDecWh, kDecB, kOutW, kOutB };

// Typed views over a flat buffer laid out like Model::tensors().
template <typename Scalar>
struct Views {
  struct Cell {
    MatMap<Scalar> wx;
    MatMap<Scalar> wh;
    VecMap<Scalar> b;
  };
  MatMap<Scalar> embedding;
  Cell enc;
  Cell dec;
  MatMap<Scalar> out_w;
  VecMap<Scalar> out_b;

  Views(Scalar* base, const std::vector<TensorInfo>& t)
      : embedding(mat(base, t[kEmbedding])),
        enc{mat(base, t[kEncWx]), mat(base, t[kEncWh]), vec(base, t[kEncB])},
        dec{mat(base, t[kDecWx]), mat(base, t[kDecWh]), vec(base, t[kDecB])},
        out_w(mat(base, t[kOutW])),
        out_b(vec(base, t[kOutB])) {}

  static MatMap<Scalar> mat(Scalar* base, const TensorInfo& info) {
    return MatMap<Scalar>(base + info.offset, info.rows, info.cols);
  }
  static VecMap<Scalar> vec(Scalar* base, const TensorInfo& info) {
    return VecMap<Scalar>(base + info.offset, info.size());
  }
};

using ConstViews = Views<const double>;
using GradViews = Views<double>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct StepCache {
  TokenId token = 0;
  Eigen::VectorXd h_prev;
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  Eigen::VectorXd n;
  Eigen::VectorXd h;
};

template <typename Cell>
StepCache cell_forward(const Cell& cell, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& h_prev, TokenId token) {
  const Eigen::Index H = h_prev.size();
  StepCache c;
  c.token = token;
  c.h_prev = h_prev;
  const Eigen::VectorXd a = cell.wx * x + cell.b;
  const Eigen::VectorXd hzr = cell.wh.topRows(2 * H) * h_prev;
  c.z = (a.head(H) + hzr.head(H)).unaryExpr(&sigmoid);
  c.r = (a.segment(H, H) + hzr.tail(H)).unaryExpr(&sigmoid);
  const Eigen::VectorXd rh = c.r.cwiseProduct(h_prev);
  c.n = (a.tail(H) + cell.wh.bottomRows(H) * rh).array().tanh().matrix();
  c.h = (Eigen::VectorXd::Ones(H) - c.z).cwiseProduct(c.n) +
        c.z.cwiseProduct(h_prev);
  return c;
}

// Backpropagates dh through one cell step. Accumulates parameter gradients
// and the input embedding gradient, returns d h_prev.
template <typename Cell, typename GradCell, typename EmbGrad>
Eigen::VectorXd cell_backward(const Cell& cell, GradCell& g, EmbGrad& g_emb,
                              const Eigen::VectorXd& x, const StepCache& c,
                              const Eigen::VectorXd& dh) {
  const Eigen::Index H = dh.size();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(H);
  const Eigen::VectorXd dn = dh.cwiseProduct(one - c.z);
  const Eigen::VectorXd dz = dh.cwiseProduct(c.h_prev - c.n);
  Eigen::VectorXd dh_prev = dh.cwiseProduct(c.z);

  const Eigen::VectorXd da_n =
      dn.cwiseProduct(one - c.n.cwiseProduct(c.n));
  const Eigen::VectorXd rh = c.r.cwiseProduct(c.h_prev);
  g.wx.bottomRows(H).noalias() += da_n * x.transpose();
  g.wh.bottomRows(H).noalias() += da_n * rh.transpose();
  g.b.tail(H) += da_n;
  const Eigen::VectorXd d_rh = cell.wh.bottomRows(H).transpose() * da_n;
  const Eigen::VectorXd dr = d_rh.cwiseProduct(c.h_prev);
  dh_prev += d_rh.cwiseProduct(c.r);

  Eigen::VectorXd da_zr(2 * H);
  da_zr.head(H) = dz.cwiseProduct(c.z).cwiseProduct(one - c.z);
  da_zr.tail(H) = dr.cwiseProduct(c.r).cwiseProduct(one - c.r);
  g.wx.topRows(2 * H).noalias() += da_zr * x.transpose();
  g.wh.topRows(2 * H).noalias() += da_zr * c.h_prev.transpose();
  g.b.head(2 * H) += da_zr;
  dh_prev.noalias() += cell.wh.topRows(2 * H).transpose() * da_zr;

  Eigen::VectorXd dx = cell.wx.bottomRows(H).transpose() * da_n;
  dx.noalias() += cell.wx.topRows(2 * H).transpose() * da_zr;
  g_emb.row(c.token) += dx.transpose();
  return dh_prev;
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return z.array() - lse;
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size <= static_cast<std::size_t>(kNumSpecial)) {
    throw Error("model vocab_size must exceed the number of special tokens");
  }
  if (embed_dim == 0 || hidden_dim == 0) {
    throw Error("model dimensions must be > 0");
  }
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t V = config.vocab_size;
  const std::size_t E = config.embed_dim;
  const std::size_t H = config.hidden_dim;
  const std::vector<std::tuple<const char*, std::size_t, std::size_t>> layout = {
      {"embedding", V, E},       {"encoder.w_x", 3 * H, E},
      {"encoder.w_h", 3 * H, H}, {"encoder.b", 3 * H, 1},
      {"decoder.w_x", 3 * H, E}, {"decoder.w_h", 3 * H, H},
      {"decoder.b", 3 * H, 1},   {"output.w", V, H},
      {"output.b", V, 1}};
  std::size_t offset = 0;
  for (const auto& [name, rows, cols] : layout) {
    tensors_.push_back({name, rows, cols, offset});
    offset += rows * cols;
  }
  params_.assign(offset, 0.0);
}

Model Model::random(const ModelConfig& config, std::uint64_t seed,
                    double scale) {
  Model m(config);
  Rng rng(seed);
  for (double& p : m.params_) p = rng.uniform(-scale, scale);
  return m;
}

Eigen::VectorXd Model::encode_source(const TokenSeq& source) const {
  if (source.empty()) throw Error("encode_source: empty source");
  const ConstViews v(params_.data(), tensors_);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(config_.hidden_dim);
  for (TokenId tok : source) {
    h = cell_forward(v.enc, v.embedding.row(tok).transpose(), h, tok).h;
  }
  return h;
}

Eigen::VectorXd Model::decoder_step(const Eigen::VectorXd& h,
                                    TokenId prev) const {
  const ConstViews v(params_.data(), tensors_);
  return cell_forward(v.dec, v.embedding.row(prev).transpose(), h, prev).h;
}

Eigen::VectorXd Model::output_log_probs(const Eigen::VectorXd& h) const {
  const ConstViews v(params_.data(), tensors_);
  return log_softmax(v.out_w * h + v.out_b);
}

Eigen::MatrixXd Model::teacher_forced_logprobs(
    const Eigen::VectorXd& h0, const TokenSeq& conditioning) const {
  Eigen::MatrixXd rows(conditioning.size(), config_.vocab_size);
  Eigen::VectorXd h = h0;
  TokenId prev = kBosId;
  for (std::size_t t = 0; t < conditioning.size(); ++t) {
    h = decoder_step(h, prev);
    rows.row(t) = output_log_probs(h).transpose();
    prev = conditioning[t];
  }
  return rows;
}

LossBreakdown Model::loss_and_gradient(const TokenSeq& source,
                                       const LossPlan& plan,
                                       std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error("gradient buffer size mismatch");
  if (source.empty()) throw Error("encode_source: empty source");
  const ConstViews v(params_.data(), tensors_);
  GradViews g(grad.data(), tensors_);
  const Eigen::Index H = static_cast<Eigen::Index>(config_.hidden_dim);
  const Eigen::Index V = static_cast<Eigen::Index>(config_.vocab_size);

  std::vector<StepCache> enc_steps;
  enc_steps.reserve(source.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  for (TokenId tok : source) {
    enc_steps.push_back(
        cell_forward(v.enc, v.embedding.row(tok).transpose(), h, tok));
    h = enc_steps.back().h;
  }
  const Eigen::VectorXd h0 = h;

  // One teacher-forced pass per distinct conditioning sequence. The
  // reference always gets a pass so the diagnostics and entropy term exist.
  std::vector<const TargetTerm*> passes;
  bool has_reference = false;
  for (const auto& term : plan.terms) {
    passes.push_back(&term);
    has_reference |= term.conditioning == plan.reference;
  }
  TargetTerm reference_only;
  if (!has_reference) {
    reference_only.conditioning = plan.reference;
    reference_only.weights = Eigen::MatrixXd::Zero(plan.reference.size(), V);
    passes.push_back(&reference_only);
  }

  LossBreakdown out;
  Eigen::VectorXd dh0 = Eigen::VectorXd::Zero(H);
  std::vector<StepCache> steps;
  for (const TargetTerm* term : passes) {
    const TokenSeq& cond = term->conditioning;
    const Eigen::Index T = static_cast<Eigen::Index>(cond.size());
    if (term->weights.rows() != T || term->weights.cols() != V) {
      throw Error("target rows do not match model output shape");
    }
    const bool is_reference = cond == plan.reference;

    steps.clear();
    Eigen::MatrixXd dz(T, V);
    Eigen::VectorXd hs = h0;
    TokenId prev = kBosId;
    double entropy_sum = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      steps.push_back(
          cell_forward(v.dec, v.embedding.row(prev).transpose(), hs, prev));
      hs = steps.back().h;
      const Eigen::VectorXd lp = log_softmax(v.out_w * hs + v.out_b);
      const Eigen::VectorXd p = lp.array().exp();
      const auto w = term->weights.row(t);
      double wsum = 0.0;
      for (Eigen::Index k = 0; k < V; ++k) {
        if (w[k] != 0.0) {
          out.total -= w[k] * lp[k];
          wsum += w[k];
        }
      }
      dz.row(t) = (wsum * p - w.transpose()).transpose();
      if (is_reference) {
        out.mle -= lp[cond[t]];
        const double ent = -(p.array() * lp.array()).sum();
        entropy_sum += ent;
        if (plan.entropy_weight != 0.0) {
          // d(-gamma H)/dz_j = gamma p_j (log p_j + H)
          dz.row(t) += (plan.entropy_weight *
                        p.array() * (lp.array() + ent)).matrix().transpose();
        }
      }
      prev = cond[t];
    }
    if (is_reference) {
      out.total -= plan.entropy_weight * entropy_sum;
      out.mean_entropy = T ? entropy_sum / static_cast<double>(T) : 0.0;
    }

    Eigen::VectorXd dh = Eigen::VectorXd::Zero(H);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const StepCache& c = steps[t];
      const Eigen::VectorXd dzt = dz.row(t).transpose();
      g.out_w.noalias() += dzt * c.h.transpose();
      g.out_b += dzt;
      dh.noalias() += v.out_w.transpose() * dzt;
      dh = cell_backward(v.dec, g.dec, g.embedding,
                         v.embedding.row(c.token).transpose(), c, dh);
    }
    dh0 += dh;
  }

  Eigen::VectorXd dh = dh0;
  for (auto it = enc_steps.rbegin(); it != enc_steps.rend(); ++it) {
    dh = cell_backward(v.enc, g.enc, g.embedding,
                       v.embedding.row(it->token).transpose(), *it, dh);
  }
  return out;
}

ModelLogProbs::ModelLogProbs(const Model& model, const TokenSeq& source)
    : model_(model), h0_(model.encode_source(source)) {}

Eigen::MatrixXd ModelLogProbs::log_probs(const TokenSeq& conditioning) const {
  return model_.teacher_forced_logprobs(h0_, conditioning);
}

bool decodable(TokenId id) { return id != kPadId && id != kBosId; }

bool better_hypothesis(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.prefix.size() != b.prefix.size()) {
    return a.prefix.size() < b.prefix.size();
  }
  return a.prefix < b.prefix;
}

BeamHypothesis beam_search_hypothesis(const Model& model, const TokenSeq& source,
                                      std::size_t beam_size,
                                      std::size_t max_len) {
  if (beam_size < 1) throw Error("beam_size must be >= 1");
  if (max_len < 1) throw Error("max_len must be >= 1");
  const std::size_t V = model.config().vocab_size;

  struct Live {
    BeamHypothesis hyp;
    Eigen::VectorXd state;
  };
  struct Candidate {
    BeamHypothesis hyp;
    std::size_t parent;
  };

  std::vector<Live> live = {{BeamHypothesis{}, model.encode_source(source)}};
  std::vector<BeamHypothesis> finished;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    std::vector<Eigen::VectorXd> next_states(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      const TokenId prev =
          live[i].hyp.prefix.empty() ? kBosId : live[i].hyp.prefix.back();
      next_states[i] = model.decoder_step(live[i].state, prev);
      const Eigen::VectorXd lp = model.output_log_probs(next_states[i]);
      for (std::size_t w = 0; w < V; ++w) {
        const TokenId id = static_cast<TokenId>(w);
        if (!decodable(id)) continue;
        Candidate c{live[i].hyp, i};
        c.hyp.prefix.push_back(id);
        c.hyp.score += lp[w];
        c.hyp.finished = id == kEosId;
        candidates.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min(beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return better_hypothesis(a.hyp, b.hyp);
                      });
    std::vector<Live> next;
    for (std::size_t k = 0; k < keep; ++k) {
      if (candidates[k].hyp.finished) {
        finished.push_back(std::move(candidates[k].hyp));
      } else {
        next.push_back({std::move(candidates[k].hyp),
                        next_states[candidates[k].parent]});
      }
    }
    live = std::move(next);

    // Scores only decrease as prefixes grow, so once the best finished
    // hypothesis beats every live one the search is over.
    if (!finished.empty() && !live.empty()) {
      const auto best_f = std::min_element(finished.begin(), finished.end(),
                                           better_hypothesis);
      bool any_better = false;
      for (const auto& l : live) any_better |= l.hyp.score > best_f->score;
      if (!any_better) break;
    }
  }

  if (!finished.empty()) {
    return *std::min_element(finished.begin(), finished.end(),
                             better_hypothesis);
  }
  BeamHypothesis best = live.front().hyp;
  for (const auto& l : live) {
    if (better_hypothesis(l.hyp, best)) best = l.hyp;
  }
  return best;
}

TokenSeq beam_search(const Model& model, const TokenSeq& source,
                     std::size_t beam_size, std::size_t max_len) {
  return beam_search_hypothesis(model, source, beam_size, max_len).prefix;
}

TokenSeq greedy_decode(const Model& model, const TokenSeq& source,
                       std::size_t max_len) {
  if (max_len < 1) throw Error("max_len must be >= 1");
  TokenSeq out;
  Eigen::VectorXd h = model.encode_source(source);
  TokenId prev = kBosId;
  while (out.size() < max_len) {
    h = model.decoder_step(h, prev);
    const Eigen::VectorXd lp = model.output_log_probs(h);
    TokenId best = -1;
    for (Eigen::Index w = 0; w < lp.size(); ++w) {
      const TokenId id = static_cast<TokenId>(w);
      if (!decodable(id)) continue;
      if (best < 0 || lp[w] > lp[best]) best = id;
    }
    out.push_back(best);
    if (best == kEosId) break;
    prev = best;
  }
  return out;
}

double sequence_log_prob(const Model& model, const TokenSeq& source,
                         const TokenSeq& seq) {
  const Eigen::MatrixXd rows =
      model.teacher_forced_logprobs(model.encode_source(source), seq);
  double s = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) s += rows(t, seq[t]);
  return s;
}

}  // namespace lsmooth
