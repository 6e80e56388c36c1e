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

#include "lsmooth/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "lsmooth/random.h"

namespace lsmooth {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

const std::vector<std::string>& Vocabulary::special_tokens() {
  static const std::vector<std::string> kSpecials = {"<pad>", "<unk>", "<s>",
                                                     "</s>"};
  return kSpecials;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> tokens,
                                    std::vector<std::uint64_t> counts) {
  if (tokens.size() != counts.size()) {
    throw Error("vocabulary: token/count size mismatch");
  }
  const auto& specials = special_tokens();
  if (tokens.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), tokens.begin())) {
    throw Error("vocabulary: special tokens must come first");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.freq_ = std::move(counts);
  v.index_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second) {
      throw Error("vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::vector<TokenId> Vocabulary::content_ids() const {
  std::vector<TokenId> ids;
  for (std::size_t i = kNumSpecial; i < tokens_.size(); ++i) {
    ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

void Vocabulary::save(std::ostream& os) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    os << tokens_[i] << '\t' << freq_[i] << '\n';
  }
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  save(os);
}

Vocabulary Vocabulary::load(std::istream& is) {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw Error("vocabulary line " + std::to_string(lineno) +
                  ": expected token<TAB>count");
    }
    std::uint64_t count = 0;
    try {
      std::size_t pos = 0;
      const std::string s(fields[1]);
      count = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error("vocabulary line " + std::to_string(lineno) +
                  ": bad count '" + std::string(fields[1]) + "'");
    }
    tokens.emplace_back(fields[0]);
    counts.push_back(count);
  }
  return from_entries(std::move(tokens), std::move(counts));
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open vocabulary '" + path + "'");
  return load(is);
}

Vocabulary build_vocabulary(const std::vector<Tokens>& corpus,
                            std::uint64_t min_count) {
  if (corpus.empty()) throw Error("empty corpus");
  if (min_count < 1) throw Error("min_count must be >= 1");

  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq) ++counts[tok];
  }
  if (counts.empty()) throw Error("empty corpus");

  const auto& specials = Vocabulary::special_tokens();
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  std::uint64_t dropped = 0;
  for (const auto& [tok, n] : counts) {
    const bool reserved =
        std::find(specials.begin(), specials.end(), tok) != specials.end();
    if (reserved || n < min_count) {
      dropped += n;
    } else {
      kept.emplace_back(tok, n);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  std::vector<std::string> tokens(specials.begin(), specials.end());
  std::vector<std::uint64_t> freqs(specials.size(), 0);
  freqs[kUnkId] = dropped;
  for (auto& [tok, n] : kept) {
    tokens.push_back(std::move(tok));
    freqs.push_back(n);
  }
  return Vocabulary::from_entries(std::move(tokens), std::move(freqs));
}

TokenSeq encode(const Vocabulary& v, const Tokens& text, std::size_t max_len) {
  if (max_len < 1) throw Error("max_len must be >= 1");
  const std::size_t n = std::min(text.size(), max_len);
  TokenSeq ids;
  ids.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(v.id(text[i]));
  ids.push_back(kEosId);
  return ids;
}

Tokens decode(const Vocabulary& v, const TokenSeq& ids) {
  Tokens out;
  for (TokenId id : ids) {
    if (id == kEosId) break;
    if (id == kPadId || id == kBosId) continue;
    out.push_back(v.token(id));
  }
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<TokenId> collect_batch_vocab(const std::vector<Example>& examples) {
  std::set<TokenId> ids;
  for (const auto& ex : examples) {
    for (const auto& ref : ex.references) ids.insert(ref.begin(), ref.end());
  }
  return {ids.begin(), ids.end()};
}

std::vector<Batch> make_batches(const std::vector<Example>& dataset,
                                std::size_t batch_size, std::uint64_t seed) {
  if (dataset.empty()) throw Error("empty dataset");
  if (batch_size < 1) throw Error("batch_size must be >= 1");

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    const std::size_t end = std::min(order.size(), start + batch_size);
    for (std::size_t i = start; i < end; ++i) {
      b.examples.push_back(dataset[order[i]]);
    }
    b.batch_vocab = collect_batch_vocab(b.examples);
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<RawExample> read_corpus(std::istream& is, const std::string& name) {
  std::vector<RawExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw Error(name + ":" + std::to_string(lineno) +
                  ": expected source<TAB>target[<TAB>ref...]");
    }
    RawExample ex;
    ex.source = split_tokens(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      ex.references.push_back(split_tokens(fields[i]));
    }
    if (ex.references.front().empty()) {
      throw Error(name + ":" + std::to_string(lineno) + ": empty target");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<RawExample> read_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open corpus '" + path + "'");
  return read_corpus(is, path);
}

std::vector<Tokens> corpus_token_stream(const std::vector<RawExample>& raw) {
  std::vector<Tokens> stream;
  for (const auto& ex : raw) {
    stream.push_back(ex.source);
    for (const auto& ref : ex.references) stream.push_back(ref);
  }
  return stream;
}

std::vector<Example> encode_corpus(const Vocabulary& v,
                                   const std::vector<RawExample>& raw,
                                   std::size_t max_len) {
  std::vector<Example> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Example ex;
    ex.id = i;
    ex.source = encode(v, raw[i].source, max_len);
    for (const auto& ref : raw[i].references) {
      ex.references.push_back(encode(v, ref, max_len));
    }
    ex.target = ex.references.front();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace lsmooth
