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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lst/autodiff/ops.hpp"
#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"
#include "test_util.hpp"

namespace lst {
namespace {

using ad::Matrix;
using ad::Value;

// Row-normalised log-posteriors from random logits.
Matrix random_logp(std::size_t t, std::size_t v, std::mt19937_64& rng, double spread = 2.0) {
  return ad::log_softmax_rows(Value::constant(testing::random_matrix(t, v, rng, -spread, spread)))
      .data();
}

Matrix exp_of(const Matrix& m) {
  Matrix out = m;
  for (double& x : out.values()) x = std::exp(x);
  return out;
}

std::vector<int> random_tokens(std::size_t n, int v, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> tok(1, v - 1);
  std::vector<int> out(n);
  for (int& x : out) x = tok(rng);
  return out;
}

// eos sits outside the posterior columns so every column is an ordinary label.
ctc::PrefixOptions options_for(std::size_t v) {
  ctc::PrefixOptions opt;
  opt.eos = static_cast<int>(v);
  return opt;
}

// Online score of `h` built one token at a time from the empty prefix.
double chained_score(const std::vector<int>& h, const Matrix& logp, int horizon,
                     const ctc::PrefixOptions& opt) {
  auto state = ctc::initial_prefix_state();
  std::vector<int> g;
  double score = 0.0;
  for (int q : h) {
    const auto r = ctc::prefix_score_online(g, q, state, logp, horizon,
                                            static_cast<int>(logp.rows()), opt);
    score = r.score;
    state = r.state;
    g.push_back(q);
  }
  return score;
}

TEST(CtcLoss, SingleFrame) {
  std::mt19937_64 rng(1);
  const Matrix lp = random_logp(1, 4, rng);
  const auto res = ctc::ctc_loss(Value::constant(lp), std::vector<int>{2});
  EXPECT_TRUE(res.feasible);
  EXPECT_NEAR(res.loss.item(), -lp(0, 2), 1e-15);
}

TEST(CtcLoss, TwoFramesSumsThreePaths) {
  std::mt19937_64 rng(2);
  const Matrix lp = random_logp(2, 3, rng);
  const Matrix p = exp_of(lp);
  const double expected = -std::log(p(0, 0) * p(1, 1) + p(0, 1) * p(1, 0) + p(0, 1) * p(1, 1));
  EXPECT_NEAR(ctc::ctc_loss(Value::constant(lp), std::vector<int>{1}).loss.item(), expected, 1e-14);
}

TEST(CtcLoss, InfeasibleTargetFlagsAndReturnsInfinity) {
  std::mt19937_64 rng(3);
  const Matrix lp = random_logp(2, 3, rng);
  const auto res = ctc::ctc_loss(Value::constant(lp), std::vector<int>{1, 1});
  EXPECT_FALSE(res.feasible);
  EXPECT_EQ(res.loss.item(), std::numeric_limits<double>::infinity());
  EXPECT_FALSE(ctc::ctc_feasible(3, std::vector<int>{1, 2, 2}));
  EXPECT_TRUE(ctc::ctc_feasible(4, std::vector<int>{1, 2, 2}));
}

TEST(CtcLoss, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  const Matrix logits = testing::random_matrix(6, 4, rng);
  const std::vector<int> target{1, 3, 3};
  auto f = [&](const Value& x) { return ctc::ctc_loss(ad::log_softmax_rows(x), target).loss; };
  Value x = Value::parameter(logits);
  ad::backward(f(x));
  const Matrix num = testing::numeric_gradient(
      [&](const Matrix& m) { return f(Value::constant(m)).item(); }, logits);
  EXPECT_LT(testing::max_rel_error(x.grad(), num), 1e-5);
}

TEST(Oracle, SmallClosedForms) {
  const Matrix uniform(1, 4, 0.25);
  EXPECT_NEAR(ctc::brute_force_ctc_oracle(uniform, ctc::OracleMode::kPrefix, std::vector<int>{2}),
              0.25, 1e-15);
  const Matrix half(2, 2, 0.5);
  EXPECT_NEAR(ctc::brute_force_ctc_oracle(half, ctc::OracleMode::kLabel, std::vector<int>{1}), 0.75,
              1e-15);
  EXPECT_THROW(ctc::brute_force_ctc_oracle(Matrix(9, 10, 0.1), ctc::OracleMode::kLabel,
                                           std::vector<int>{1}),
               ContractError);
}

// Random instances (T <= 8, V <= 4) against path enumeration.
class OracleEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(OracleEquivalence, LossAndPrefixScoresMatchEnumeration) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const std::size_t t = 1 + rng() % 8;
  const std::size_t v = 2 + rng() % 3;
  const Matrix lp = random_logp(t, v, rng);
  const Matrix p = exp_of(lp);
  const auto opt = options_for(v);
  const std::size_t n = 1 + rng() % std::min<std::size_t>(t, 4);
  const auto target = random_tokens(n, static_cast<int>(v), rng);

  const double label = ctc::brute_force_ctc_oracle(p, ctc::OracleMode::kLabel, target);
  const auto loss = ctc::ctc_loss(Value::constant(lp), target);
  if (label > 0.0) {
    EXPECT_NEAR(loss.loss.item(), -std::log(label), 1e-9);
    EXPECT_NEAR(ctc::ctc_log_likelihood(lp, target), std::log(label), 1e-9);
  } else {
    EXPECT_FALSE(loss.feasible);
  }

  const double prefix = ctc::brute_force_ctc_oracle(p, ctc::OracleMode::kPrefix, target);
  const int total = static_cast<int>(t);
  const double online = chained_score(target, lp, total, opt);
  if (prefix > 0.0) EXPECT_NEAR(online, std::log(prefix), 1e-9);
  else EXPECT_EQ(online, kLogSentinel);

  // Offline chain gives the same bits as the online chain at the full horizon.
  auto state = ctc::initial_prefix_state();
  std::vector<int> g;
  for (int q : target) {
    const auto off = ctc::prefix_score_offline(g, q, state, lp, opt);
    const auto on = ctc::prefix_score_online(g, q, state, lp, total, total, opt);
    EXPECT_EQ(off.score, on.score);
    state = off.state;
    g.push_back(q);
  }
  const auto eos_off = ctc::prefix_score_offline(g, opt.eos, state, lp, opt);
  const auto eos_on = ctc::prefix_score_online(g, opt.eos, state, lp, total, total, opt);
  EXPECT_EQ(eos_off.score, eos_on.score);
  if (label > 0.0) EXPECT_NEAR(eos_on.score, std::log(label), 1e-9);
  // log(gamma_n + gamma_b) at the final frame, bit for bit.
  const auto last = static_cast<std::size_t>(total - 1);
  EXPECT_EQ(eos_on.score,
            std::max(ad::log_add(state->gamma_n[last], state->gamma_b[last]), kLogSentinel));
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleEquivalence, ::testing::Range(1, 251));

TEST(PrefixScore, EmptyPrefixEosIsAllBlankPath) {
  std::mt19937_64 rng(5);
  const Matrix lp = random_logp(5, 4, rng);
  double blank_path = 0.0;
  for (std::size_t r = 0; r < 5; ++r) blank_path += lp(r, 0);
  const auto opt = options_for(4);
  const auto res = ctc::prefix_score_offline({}, opt.eos, ctc::initial_prefix_state(), lp, opt);
  EXPECT_NEAR(res.score, blank_path, 1e-12);
  EXPECT_EQ(res.state, nullptr);
  const auto first = ctc::prefix_score_offline({}, 3, ctc::initial_prefix_state(), random_logp(1, 4, rng), opt);
  EXPECT_TRUE(first.state != nullptr);
}

TEST(PrefixScore, SingleFrameScoreIsPosterior) {
  std::mt19937_64 rng(6);
  const Matrix lp = random_logp(1, 4, rng);
  const auto res = ctc::prefix_score_offline({}, 2, ctc::initial_prefix_state(), lp, options_for(4));
  EXPECT_NEAR(res.score, lp(0, 2), 1e-15);
}

TEST(PrefixScore, EosBeforeLastFrameIsSentinel) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix lp = random_logp(8, 4, rng);
    const auto opt = options_for(4);
    const auto g = random_tokens(1 + trial % 3, 4, rng);
    for (int h = 1; h < 8; ++h) {
      auto state = ctc::initial_prefix_state();
      std::vector<int> prefix;
      for (int q : g) {
        state = ctc::prefix_score_online(prefix, q, state, lp, h, 8, opt).state;
        prefix.push_back(q);
      }
      EXPECT_EQ(ctc::prefix_score_online(prefix, opt.eos, state, lp, h, 8, opt).score, kLogSentinel);
      // Reverting to the unmodified rule scores the partial hypothesis as complete.
      ctc::PrefixOptions plain = opt;
      plain.eos_modification = false;
      const auto s = ctc::prefix_score_online(prefix, opt.eos, state, lp, h, 8, plain);
      const auto last = static_cast<std::size_t>(h - 1);
      EXPECT_EQ(s.score,
                std::max(ad::log_add(state->gamma_n[last], state->gamma_b[last]), kLogSentinel));
    }
  }
}

TEST(PrefixScore, TruncatedHorizonEqualsOfflineOnTruncatedPosteriors) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix lp = random_logp(8, 4, rng);
    Matrix head(5, 4);
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 4; ++c) head(r, c) = lp(r, c);
    const auto opt = options_for(4);
    const auto h = random_tokens(1 + trial % 4, 4, rng);
    const double online = chained_score(h, lp, 5, opt);
    const double offline = chained_score(h, head, 5, opt);
    const double oracle = ctc::brute_force_ctc_oracle(exp_of(head), ctc::OracleMode::kPrefix, h);
    if (oracle == 0.0) {
      EXPECT_EQ(online, kLogSentinel);
      EXPECT_EQ(offline, kLogSentinel);
      continue;
    }
    EXPECT_NEAR(online, offline, 1e-9);
    EXPECT_NEAR(online, std::log(oracle), 1e-9);
  }
}

TEST(PrefixScore, RowsBeyondHorizonDoNotMatter) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix lp = random_logp(9, 5, rng);
    const auto opt = options_for(5);
    const auto h = random_tokens(3, 5, rng);
    const double before = chained_score(h, lp, 4, opt);
    const Matrix other = random_logp(9, 5, rng);
    for (std::size_t r = 4; r < 9; ++r)
      for (std::size_t c = 0; c < 5; ++c) lp(r, c) = other(r, c);
    EXPECT_EQ(chained_score(h, lp, 4, opt), before);
  }
}

TEST(PrefixScore, IncrementalHorizonsMatchFromScratch) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix lp = random_logp(10, 4, rng);
    const auto opt = options_for(4);
    const auto h = random_tokens(4, 4, rng);
    // Grow the horizon between extensions, as the streaming decoder does.
    auto state = ctc::initial_prefix_state();
    std::vector<int> g;
    double grown = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const int horizon = 2 + 2 * static_cast<int>(i);
      state = ctc::extend_horizon(state, lp, horizon);
      const auto r = ctc::prefix_score_online(g, h[i], state, lp, horizon, 10, opt);
      grown = r.score;
      state = r.state;
      g.push_back(h[i]);
    }
    // From scratch at the final horizon.
    EXPECT_EQ(grown, chained_score(h, lp, 8, opt));
    const auto extended = ctc::extend_horizon(state, lp, 10);
    const auto scratch_state = [&] {
      auto s = ctc::initial_prefix_state();
      std::vector<int> p;
      for (int q : h) {
        s = ctc::prefix_score_online(p, q, s, lp, 10, 10, opt).state;
        p.push_back(q);
      }
      return s;
    }();
    EXPECT_EQ(extended->gamma_n, scratch_state->gamma_n);
    EXPECT_EQ(extended->gamma_b, scratch_state->gamma_b);
  }
}

TEST(PrefixScore, PrefixMassSplitsIntoExtensionsAndCompletion) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 3 + trial % 2;
    const Matrix lp = random_logp(6, v, rng);
    const auto opt = options_for(v);
    const auto h = random_tokens(1 + trial % 2, static_cast<int>(v), rng);
    auto state = ctc::initial_prefix_state();
    std::vector<int> g;
    double score = 0.0;
    for (int q : h) {
      const auto r = ctc::prefix_score_offline(g, q, state, lp, opt);
      score = r.score;
      state = r.state;
      g.push_back(q);
    }
    double mass = std::exp(ctc::prefix_score_offline(g, opt.eos, state, lp, opt).score);
    for (int nu = 1; nu < static_cast<int>(v); ++nu) {
      const double ext = ctc::prefix_score_offline(g, nu, state, lp, opt).score;
      EXPECT_LE(ext, score + 1e-12);
      mass += std::exp(ext);
    }
    EXPECT_NEAR(mass, std::exp(score), 1e-12);
  }
}

TEST(PrefixScore, ContractViolations) {
  std::mt19937_64 rng(12);
  const Matrix lp = random_logp(4, 4, rng);
  const auto opt = options_for(4);
  const auto s = ctc::prefix_score_offline({}, 1, ctc::initial_prefix_state(), lp, opt).state;
  EXPECT_THROW(ctc::prefix_score_offline(std::vector<int>{2}, 1, s, lp, opt), ContractError);
  EXPECT_THROW(ctc::prefix_score_online(std::vector<int>{1}, 2, s, lp, 0, 4, opt), ContractError);
  EXPECT_THROW(ctc::prefix_score_online(std::vector<int>{1}, 2, s, lp, 5, 4, opt), ContractError);
  EXPECT_THROW(ctc::prefix_score_online(std::vector<int>{1}, 0, s, lp, 4, 4, opt), ContractError);
}

TEST(PrefixScore, LongSequencesStayFinite) {
  std::mt19937_64 rng(13);
  const Matrix lp = random_logp(200, 6, rng, 6.0);
  const auto h = random_tokens(40, 6, rng);
  const double score = chained_score(h, lp, 200, options_for(6));
  EXPECT_TRUE(std::isfinite(score));
  EXPECT_GT(score, kLogSentinel);
}

}  // namespace
}  // namespace lst
