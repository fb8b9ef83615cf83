/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Micro-benchmarks for the hot paths: dense products, CTC recursions, AIF
// extraction, the training loss and beam search.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lst/alignment/alignment.hpp"
#include "lst/autodiff/matrix.hpp"
#include "lst/autodiff/ops.hpp"
#include "lst/autodiff/value.hpp"
#include "lst/ctc/ctc.hpp"
#include "lst/decoder/decoder.hpp"
#include "lst/nn/ls_transducer.hpp"
#include "lst/training/dataset.hpp"
#include "lst/training/trainer.hpp"

namespace {

using lst::ad::Matrix;
using lst::ad::Value;

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

Matrix random_log_probs(std::size_t t, std::size_t v, unsigned seed) {
  return lst::ad::log_softmax_rows(Value::constant(random_matrix(t, v, seed))).data();
}

std::vector<int> random_target(int len, int v, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(3, v - 1);
  std::vector<int> y(static_cast<std::size_t>(len));
  for (auto& t : y) t = tok(rng);
  return y;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(lst::ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_CtcLogLikelihood(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const Matrix logp = random_log_probs(static_cast<std::size_t>(t), 20, 3);
  const auto y = random_target(t / 4, 20, 4);
  for (auto _ : state) benchmark::DoNotOptimize(lst::ctc::ctc_log_likelihood(logp, y));
}
BENCHMARK(BM_CtcLogLikelihood)->Arg(25)->Arg(50)->Arg(100)->Arg(200);

void BM_CtcLossWithGradient(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const Matrix logits = random_matrix(static_cast<std::size_t>(t), 20, 5);
  const auto y = random_target(t / 4, 20, 6);
  for (auto _ : state) {
    const Value x = Value::parameter(logits);
    const auto loss = lst::ctc::ctc_loss(lst::ad::log_softmax_rows(x), y);
    lst::ad::backward(loss.loss);
    benchmark::DoNotOptimize(x.grad());
  }
}
BENCHMARK(BM_CtcLossWithGradient)->Arg(50)->Arg(100);

// One label step of joint decoding: every vocabulary candidate scored against
// the same parent state at a fixed horizon.
void BM_PrefixScoreStep(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  constexpr int kVocab = 20;
  const Matrix logp = random_log_probs(static_cast<std::size_t>(t), kVocab, 7);
  const auto g = random_target(3, kVocab, 8);
  lst::ctc::PrefixStatePtr st = lst::ctc::initial_prefix_state();
  for (std::size_t k = 0; k < g.size(); ++k) {
    st = lst::ctc::extend_horizon(st, logp, t / 2);
    st = lst::ctc::prefix_score_online(std::span(g).first(k), g[k], st, logp, t / 2, t).state;
  }
  for (auto _ : state) {
    const auto ext = lst::ctc::extend_horizon(st, logp, t);
    for (int q = 2; q < kVocab; ++q)
      benchmark::DoNotOptimize(lst::ctc::prefix_score_online(g, q, ext, logp, t, t));
  }
}
BENCHMARK(BM_PrefixScoreStep)->Arg(40)->Arg(80);

void BM_AifExtract(benchmark::State& state) {
  const int labels = static_cast<int>(state.range(0));
  const int t = labels * 5;
  const Value memory = Value::constant(random_matrix(static_cast<std::size_t>(t), 32, 9));
  const Value queries = Value::constant(random_matrix(static_cast<std::size_t>(labels), 32, 10));
  std::vector<int> bounds(static_cast<std::size_t>(labels));
  for (int j = 0; j < labels; ++j) bounds[static_cast<std::size_t>(j)] = 5 * (j + 1);
  for (auto _ : state) benchmark::DoNotOptimize(lst::align::aif_extract(memory, queries, bounds));
}
BENCHMARK(BM_AifExtract)->Arg(5)->Arg(10)->Arg(20);

struct ToyFixture {
  lst::nn::ModelConfig model_config;
  lst::train::SynthSpec spec;
  lst::train::Dataset data;
  ToyFixture() {
    spec.vocab_size = model_config.vocab_size;
    spec.feat_dim = model_config.feat_dim;
    const lst::train::Lexicon lexicon(spec);
    data = lst::train::synth_dataset(lexicon, lst::train::Domain::kSource, 4, 11);
  }
};

void BM_LstLossForwardBackward(benchmark::State& state) {
  const ToyFixture fx;
  lst::nn::LsTransducer model(fx.model_config, 12);
  const lst::train::TrainConfig config;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto loss = lst::train::lst_loss(model, fx.data[i++ % fx.data.size()], config);
    lst::ad::backward(loss.total);
    model.params().zero_grad();
  }
}
BENCHMARK(BM_LstLossForwardBackward)->Unit(benchmark::kMillisecond);

void BM_DecodeUtterance(benchmark::State& state) {
  const ToyFixture fx;
  const lst::nn::LsTransducer model(fx.model_config, 13);
  lst::decode::BeamConfig config;
  config.beam = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lst::decode::decode_utterance(model, fx.data[0].feats, config));
}
BENCHMARK(BM_DecodeUtterance)->Arg(1)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
