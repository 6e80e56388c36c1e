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

#ifndef LSMOOTH_METRICS_H_
#define LSMOOTH_METRICS_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lsmooth/common.h"

namespace lsmooth {

inline constexpr int kMaxNgram = 4;

using Ngram = std::vector<TokenId>;
// n-gram -> count, for every n in 1..max_n.
using NGramCounts = std::map<Ngram, int>;

NGramCounts count_ngrams(const TokenSeq& seq, int max_n = kMaxNgram);

// Drops bos/eos/pad before scoring; unk is scored like any other token.
TokenSeq strip_markers(const TokenSeq& seq);

std::size_t hamming(const TokenSeq& y, const TokenSeq& y_ref);

// Sentence-level BLEU-4 with multi-reference clipping. Precisions for n >= 2
// use add-one smoothing; the unigram precision does not.
double sentence_bleu4(const TokenSeq& y, const std::vector<TokenSeq>& refs);

// Corpus-level BLEU-4: clipped counts and lengths are summed before the
// geometric mean. No smoothing.
double corpus_bleu4(
    const std::vector<std::pair<TokenSeq, std::vector<TokenSeq>>>& pairs);

// Document-frequency based idf for CIDEr-D. One "document" is the reference
// set of one example.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::size_t num_docs, std::map<Ngram, double> idf);

  bool empty() const { return num_docs_ == 0; }
  std::size_t num_docs() const { return num_docs_; }
  // log(N / max(1, df(g))); unseen n-grams get log N.
  double idf(const Ngram& g) const;
  const std::map<Ngram, double>& table() const { return idf_; }

  // `#num_docs<TAB>N` followed by one `ids<TAB>idf` line per n-gram.
  void save(std::ostream& os) const;
  static IdfTable load(std::istream& is);

 private:
  std::size_t num_docs_ = 0;
  double log_num_docs_ = 0.0;
  std::map<Ngram, double> idf_;
};

IdfTable build_idf(const std::vector<std::vector<TokenSeq>>& reference_corpus);

inline constexpr double kCiderSigma = 6.0;

// CIDEr-D: clipped tf-idf cosine per n, Gaussian length penalty, averaged
// over n = 1..4 and over references, times 10.
double cider(const TokenSeq& y, const std::vector<TokenSeq>& refs,
             const IdfTable& idf);

enum class RewardKind { kHamming, kBleu4, kCider };

const char* to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& s);

// A sequence reward r(y, refs); larger is better. Hamming yields -distance
// against refs.front().
class RewardFn {
 public:
  static RewardFn hamming();
  static RewardFn bleu4(bool multi_ref);
  static RewardFn cider(IdfTable idf);

  RewardKind kind() const { return kind_; }
  bool multi_ref() const { return multi_ref_; }
  const IdfTable* idf() const { return kind_ == RewardKind::kCider ? &idf_ : nullptr; }

  // In single-reference mode only refs.front() is used; callers choose which
  // reference goes first.
  double operator()(const TokenSeq& y, const std::vector<TokenSeq>& refs) const;

 private:
  RewardKind kind_ = RewardKind::kHamming;
  bool multi_ref_ = false;
  IdfTable idf_;
};

}  // namespace lsmooth

#endif  // LSMOOTH_METRICS_H_
