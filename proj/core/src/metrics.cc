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

#include "lsmooth/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "lsmooth/corpus.h"

namespace lsmooth {

namespace {

struct BleuStats {
  std::array<double, kMaxNgram> matched{};
  std::array<double, kMaxNgram> total{};
  double cand_len = 0;
  double ref_len = 0;
};

// Length of the reference closest to `cand_len`; ties go to the shorter one.
std::size_t closest_ref_length(std::size_t cand_len,
                               const std::vector<TokenSeq>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) {
      return len > cand_len ? len - cand_len : cand_len - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) {
      best = r.size();
    }
  }
  return best;
}

BleuStats bleu_stats(const TokenSeq& y, const std::vector<TokenSeq>& refs) {
  BleuStats s;
  const NGramCounts cand = count_ngrams(y);
  NGramCounts max_ref;
  for (const auto& r : refs) {
    for (const auto& [g, c] : count_ngrams(r)) {
      auto& m = max_ref[g];
      m = std::max(m, c);
    }
  }
  for (const auto& [g, c] : cand) {
    const auto it = max_ref.find(g);
    const int clip = it == max_ref.end() ? 0 : std::min(c, it->second);
    s.matched[g.size() - 1] += clip;
    s.total[g.size() - 1] += c;
  }
  s.cand_len = static_cast<double>(y.size());
  s.ref_len = static_cast<double>(closest_ref_length(y.size(), refs));
  return s;
}

double brevity_penalty(double cand_len, double ref_len) {
  if (cand_len >= ref_len) return 1.0;
  return std::exp(1.0 - ref_len / cand_len);
}

using NgramVec = std::array<std::map<Ngram, double>, kMaxNgram>;

struct TfIdf {
  NgramVec vec;
  std::array<double, kMaxNgram> norm{};
  double length = 0;
};

TfIdf tf_idf(const TokenSeq& seq, const IdfTable& idf) {
  TfIdf out;
  for (const auto& [g, c] : count_ngrams(seq)) {
    const std::size_t n = g.size() - 1;
    const double v = static_cast<double>(c) * idf.idf(g);
    out.vec[n][g] = v;
    out.norm[n] += v * v;
  }
  for (double& nrm : out.norm) nrm = std::sqrt(nrm);
  out.length = static_cast<double>(seq.size());
  return out;
}

double cider_sim(const TfIdf& hyp, const TfIdf& ref) {
  const double delta = hyp.length - ref.length;
  const double penalty =
      std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  double sum = 0.0;
  for (int n = 0; n < kMaxNgram; ++n) {
    double val = 0.0;
    for (const auto& [g, vh] : hyp.vec[n]) {
      const auto it = ref.vec[n].find(g);
      if (it == ref.vec[n].end()) continue;
      val += std::min(vh, it->second) * it->second;
    }
    if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) {
      val /= hyp.norm[n] * ref.norm[n];
    }
    sum += val * penalty;
  }
  return sum;
}

}  // namespace

NGramCounts count_ngrams(const TokenSeq& seq, int max_n) {
  NGramCounts counts;
  for (int n = 1; n <= max_n; ++n) {
    if (seq.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
      ++counts[Ngram(seq.begin() + i, seq.begin() + i + n)];
    }
  }
  return counts;
}

TokenSeq strip_markers(const TokenSeq& seq) {
  TokenSeq out;
  out.reserve(seq.size());
  for (TokenId id : seq) {
    if (id != kBosId && id != kEosId && id != kPadId) out.push_back(id);
  }
  return out;
}

std::size_t hamming(const TokenSeq& y, const TokenSeq& y_ref) {
  if (y.size() != y_ref.size()) throw Error("hamming length mismatch");
  std::size_t d = 0;
  for (std::size_t t = 0; t < y.size(); ++t) d += y[t] != y_ref[t];
  return d;
}

double sentence_bleu4(const TokenSeq& y, const std::vector<TokenSeq>& refs) {
  if (refs.empty()) throw Error("sentence_bleu4: no references");
  if (y.empty()) return 0.0;
  const BleuStats s = bleu_stats(y, refs);
  if (s.matched[0] == 0.0) return 0.0;
  double log_prec = std::log(s.matched[0] / s.total[0]);
  for (int n = 1; n < kMaxNgram; ++n) {
    log_prec += std::log((s.matched[n] + 1.0) / (s.total[n] + 1.0));
  }
  return brevity_penalty(s.cand_len, s.ref_len) *
         std::exp(log_prec / kMaxNgram);
}

double corpus_bleu4(
    const std::vector<std::pair<TokenSeq, std::vector<TokenSeq>>>& pairs) {
  if (pairs.empty()) throw Error("corpus_bleu4: empty pair list");
  BleuStats acc;
  for (const auto& [y, refs] : pairs) {
    if (refs.empty()) throw Error("corpus_bleu4: no references");
    const BleuStats s = bleu_stats(y, refs);
    for (int n = 0; n < kMaxNgram; ++n) {
      acc.matched[n] += s.matched[n];
      acc.total[n] += s.total[n];
    }
    acc.cand_len += s.cand_len;
    acc.ref_len += s.ref_len;
  }
  if (acc.cand_len == 0.0) return 0.0;
  double log_prec = 0.0;
  for (int n = 0; n < kMaxNgram; ++n) {
    if (acc.matched[n] == 0.0 || acc.total[n] == 0.0) return 0.0;
    log_prec += std::log(acc.matched[n] / acc.total[n]);
  }
  return brevity_penalty(acc.cand_len, acc.ref_len) *
         std::exp(log_prec / kMaxNgram);
}

IdfTable::IdfTable(std::size_t num_docs, std::map<Ngram, double> idf)
    : num_docs_(num_docs),
      log_num_docs_(num_docs ? std::log(static_cast<double>(num_docs)) : 0.0),
      idf_(std::move(idf)) {}

double IdfTable::idf(const Ngram& g) const {
  const auto it = idf_.find(g);
  return it == idf_.end() ? log_num_docs_ : it->second;
}

void IdfTable::save(std::ostream& os) const {
  os << "#num_docs\t" << num_docs_ << '\n';
  os << std::setprecision(17);
  for (const auto& [g, v] : idf_) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i) os << ' ';
      os << g[i];
    }
    os << '\t' << v << '\n';
  }
}

IdfTable IdfTable::load(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t num_docs = 0;
  std::map<Ngram, double> table;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("idf line " + std::to_string(lineno) + ": missing tab");
    }
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (key == "#num_docs") {
      num_docs = std::stoull(value);
      continue;
    }
    Ngram g;
    std::istringstream ks(key);
    TokenId id;
    while (ks >> id) g.push_back(id);
    if (g.empty() || g.size() > kMaxNgram) {
      throw Error("idf line " + std::to_string(lineno) + ": bad n-gram");
    }
    table[g] = std::stod(value);
  }
  if (num_docs == 0) throw Error("idf file: missing #num_docs header");
  return IdfTable(num_docs, std::move(table));
}

IdfTable build_idf(const std::vector<std::vector<TokenSeq>>& reference_corpus) {
  if (reference_corpus.empty()) throw Error("build_idf: empty corpus");
  std::map<Ngram, std::size_t> df;
  for (const auto& refs : reference_corpus) {
    std::set<Ngram> seen;
    for (const auto& r : refs) {
      for (const auto& [g, c] : count_ngrams(strip_markers(r))) seen.insert(g);
    }
    for (const auto& g : seen) ++df[g];
  }
  const double n = static_cast<double>(reference_corpus.size());
  std::map<Ngram, double> idf;
  for (const auto& [g, d] : df) {
    idf[g] = std::log(n / std::max<double>(1.0, static_cast<double>(d)));
  }
  return IdfTable(reference_corpus.size(), std::move(idf));
}

double cider(const TokenSeq& y, const std::vector<TokenSeq>& refs,
             const IdfTable& idf) {
  if (idf.empty()) throw Error("idf not initialized");
  if (refs.empty()) throw Error("cider: no references");
  const TfIdf hyp = tf_idf(y, idf);
  double total = 0.0;
  for (const auto& r : refs) total += cider_sim(hyp, tf_idf(r, idf));
  return 10.0 * total / kMaxNgram / static_cast<double>(refs.size());
}

const char* to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kHamming:
      return "hamming";
    case RewardKind::kBleu4:
      return "bleu4";
    case RewardKind::kCider:
      return "cider";
  }
  return "?";
}

RewardKind reward_kind_from_string(const std::string& s) {
  if (s == "hamming") return RewardKind::kHamming;
  if (s == "bleu4") return RewardKind::kBleu4;
  if (s == "cider") return RewardKind::kCider;
  throw Error("unknown reward '" + s + "'");
}

RewardFn RewardFn::hamming() { return RewardFn(); }

RewardFn RewardFn::bleu4(bool multi_ref) {
  RewardFn f;
  f.kind_ = RewardKind::kBleu4;
  f.multi_ref_ = multi_ref;
  return f;
}

RewardFn RewardFn::cider(IdfTable idf) {
  if (idf.empty()) throw Error("idf not initialized");
  RewardFn f;
  f.kind_ = RewardKind::kCider;
  f.multi_ref_ = true;
  f.idf_ = std::move(idf);
  return f;
}

double RewardFn::operator()(const TokenSeq& y,
                            const std::vector<TokenSeq>& refs) const {
  if (refs.empty()) throw Error("reward: no references");
  switch (kind_) {
    case RewardKind::kHamming:
      return -static_cast<double>(lsmooth::hamming(y, refs.front()));
    case RewardKind::kBleu4:
    case RewardKind::kCider: {
      std::vector<TokenSeq> scored;
      const std::size_t m = multi_ref_ ? refs.size() : 1;
      for (std::size_t i = 0; i < m; ++i) scored.push_back(strip_markers(refs[i]));
      const TokenSeq cand = strip_markers(y);
      return kind_ == RewardKind::kBleu4 ? sentence_bleu4(cand, scored)
                                         : lsmooth::cider(cand, scored, idf_);
    }
  }
  return 0.0;
}

}  // namespace lsmooth
