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

#ifndef LSMOOTH_CORPUS_H_
#define LSMOOTH_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lsmooth/common.h"

namespace lsmooth {

using Tokens = std::vector<std::string>;

// Splits on runs of ASCII whitespace. Input is assumed pre-tokenized.
Tokens split_tokens(std::string_view text);

// Token <-> id map with training-corpus term frequencies. Ids are dense,
// specials occupy 0..3. Immutable once built.
class Vocabulary {
 public:
  // Builds from an explicit (token, count) list in id order. The first four
  // entries must be the special tokens.
  static Vocabulary from_entries(std::vector<std::string> tokens,
                                 std::vector<std::uint64_t> counts);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t freq(TokenId id) const { return freq_.at(id); }
  const std::vector<std::uint64_t>& freqs() const { return freq_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Returns kUnkId for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;

  // Ids >= kNumSpecial, ascending.
  std::vector<TokenId> content_ids() const;

  // Vocabulary file: one `token<TAB>count` line per id.
  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static Vocabulary load(std::istream& is);
  static Vocabulary load(const std::string& path);

  static const std::vector<std::string>& special_tokens();

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> freq_;
  std::unordered_map<std::string, TokenId> index_;
};

Vocabulary build_vocabulary(const std::vector<Tokens>& corpus,
                            std::uint64_t min_count);

// Unknown -> unk, truncate to max_len, then append eos.
TokenSeq encode(const Vocabulary& v, const Tokens& text, std::size_t max_len);

// Inverse of encode for in-vocabulary text: drops pad/bos/eos.
Tokens decode(const Vocabulary& v, const TokenSeq& ids);
std::string join_tokens(const Tokens& tokens);

struct Example {
  std::size_t id = 0;
  TokenSeq source;
  TokenSeq target;
  // Always contains `target` as its first element.
  std::vector<TokenSeq> references;
};

struct Batch {
  std::vector<Example> examples;
  // Sorted, deduplicated ids occurring in any reference of the batch.
  std::vector<TokenId> batch_vocab;
};

std::vector<TokenId> collect_batch_vocab(const std::vector<Example>& examples);

std::vector<Batch> make_batches(const std::vector<Example>& dataset,
                                std::size_t batch_size, std::uint64_t seed);

// One raw corpus line: source, target and optional extra references.
struct RawExample {
  Tokens source;
  std::vector<Tokens> references;  // references[0] is the target
};

// Corpus file: `source \t target \t ref2 ...` per line. Errors carry the
// file name and line number.
std::vector<RawExample> read_corpus(const std::string& path);
std::vector<RawExample> read_corpus(std::istream& is,
                                    const std::string& name = "<stream>");

// Every token sequence in the corpus (sources and all references), in file
// order; this is the stream fed to build_vocabulary.
std::vector<Tokens> corpus_token_stream(const std::vector<RawExample>& raw);

std::vector<Example> encode_corpus(const Vocabulary& v,
                                   const std::vector<RawExample>& raw,
                                   std::size_t max_len);

}  // namespace lsmooth

#endif  // LSMOOTH_CORPUS_H_
