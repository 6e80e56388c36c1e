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

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "lsmooth/losses.h"
#include "lsmooth/metrics.h"
#include "lsmooth/model.h"
#include "lsmooth/random.h"
#include "lsmooth/sampling.h"
#include "lsmooth/token_smooth.h"

namespace lsmooth {
namespace {

TokenSeq random_sequence(Rng& rng, std::size_t len, std::size_t vocab) {
  TokenSeq s(len);
  for (auto& t : s) t = static_cast<TokenId>(kNumSpecial + rng.below(vocab - kNumSpecial));
  s.push_back(kEosId);
  return s;
}

std::vector<TokenId> content_ids(std::size_t vocab) {
  std::vector<TokenId> out;
  for (std::size_t i = kNumSpecial; i < vocab; ++i) out.push_back(static_cast<TokenId>(i));
  return out;
}

void BM_StratifiedSample(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto sub = content_ids(1004);
  Rng rng(1);
  const TokenSeq y = random_sequence(rng, len, 1004);
  for (auto _ : state) benchmark::DoNotOptimize(stratified_sample(y, 0.9, sub, rng));
}
BENCHMARK(BM_StratifiedSample)->Arg(8)->Arg(32);

void BM_ImportanceSampleBleu(benchmark::State& state) {
  const auto sub = content_ids(104);
  Rng rng(2);
  const std::vector<TokenSeq> refs = {random_sequence(rng, 20, 104), random_sequence(rng, 18, 104)};
  const RewardDistParams params{0.5, RewardFn::bleu4(true), static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(importance_sample(refs, params, {0.9, sub}, rng));
}
BENCHMARK(BM_ImportanceSampleBleu)->Arg(10)->Arg(100);

void BM_SentenceBleu(benchmark::State& state) {
  Rng rng(3);
  const TokenSeq y = random_sequence(rng, 20, 60);
  const std::vector<TokenSeq> refs = {random_sequence(rng, 20, 60), random_sequence(rng, 22, 60)};
  for (auto _ : state) benchmark::DoNotOptimize(sentence_bleu4(y, refs));
}
BENCHMARK(BM_SentenceBleu);

void BM_Cider(benchmark::State& state) {
  Rng rng(4);
  std::vector<std::vector<TokenSeq>> corpus;
  for (int i = 0; i < 200; ++i)
    corpus.push_back({random_sequence(rng, 12, 60), random_sequence(rng, 12, 60)});
  const IdfTable idf = build_idf(corpus);
  const TokenSeq y = random_sequence(rng, 12, 60);
  for (auto _ : state) benchmark::DoNotOptimize(cider(y, corpus[0], idf));
}
BENCHMARK(BM_Cider);

void BM_ModelLossAndGradient(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const Model m = Model::random({1000, hidden / 2, hidden}, 5);
  Rng rng(5);
  const TokenSeq src = random_sequence(rng, 15, 1000), y = random_sequence(rng, 15, 1000);
  const LossPlan plan = mle_plan(y, 1000);
  std::vector<double> grad(m.num_params());
  for (auto _ : state) benchmark::DoNotOptimize(m.loss_and_gradient(src, plan, grad));
}
BENCHMARK(BM_ModelLossAndGradient)->Arg(64)->Arg(256);

// Sequence-level loss and gradient with L samples, lazy (arg 1) or exact (arg 0).
void BM_SeqLossLazyVsExact(benchmark::State& state) {
  const bool lazy = state.range(0) != 0;
  const auto num_samples = static_cast<std::size_t>(state.range(1));
  const Model m = Model::random({1000, 64, 128}, 6);
  Rng rng(6);
  const TokenSeq src = random_sequence(rng, 15, 1000), y = random_sequence(rng, 15, 1000);
  const auto samples = stratified_samples(y, 0.9, content_ids(1000), num_samples, rng);
  const LossPlan plan = seq_plan(y, samples, 1000, 0.5, lazy);
  std::vector<double> grad(m.num_params());
  for (auto _ : state) benchmark::DoNotOptimize(m.loss_and_gradient(src, plan, grad));
}
BENCHMARK(BM_SeqLossLazyVsExact)->Args({0, 3})->Args({1, 3})->Args({0, 10})->Args({1, 10});

void BM_TokenSmootherTargets(benchmark::State& state) {
  auto emb = std::make_shared<const EmbeddingTable>(random_embeddings(2000, 50, 7));
  const TokenSmoother smoother(emb, std::vector<std::uint64_t>(2000, 5), {});
  Rng rng(7);
  const TokenSeq y = random_sequence(rng, 20, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(smoother.targets(y));
}
BENCHMARK(BM_TokenSmootherTargets);

}  // namespace
}  // namespace lsmooth

BENCHMARK_MAIN();
