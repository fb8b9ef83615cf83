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

// Acceptance gate. Runs the ten release criteria and prints one
// "criterion N: PASS|FAIL ..." line each; exits nonzero when any fails.
//
//   acceptance [--only N[,M...]] [--seeds K]

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lst/alignment/alignment.hpp"
#include "lst/autodiff/ops.hpp"
#include "lst/autodiff/param_store.hpp"
#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"
#include "lst/decoder/decoder.hpp"
#include "lst/nn/ls_transducer.hpp"
#include "lst/training/dataset.hpp"
#include "lst/training/gradcheck.hpp"
#include "lst/training/metrics.hpp"
#include "lst/training/trainer.hpp"

namespace {

using namespace lst;
using ad::Matrix;
using ad::Value;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& x : m.values()) x = u(rng);
  return m;
}

Matrix random_logp(std::size_t t, std::size_t v, std::mt19937_64& rng) {
  return ad::log_softmax_rows(Value::constant(random_matrix(t, v, rng, -2.0, 2.0))).data();
}

Matrix exp_of(const Matrix& m) {
  Matrix out = m;
  for (double& x : out.values()) x = std::exp(x);
  return out;
}

// ---------------------------------------------------------------------------
// 1. CTC loss and prefix scores against path enumeration.

Verdict criterion_ctc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  double worst = 0.0;
  int instances = 0;
  bool support_mismatch = false;
  auto compare = [&](double lib, double prob) {
    if (prob <= 0.0) {
      if (lib > kLogSentinel) support_mismatch = true;
      return;
    }
    worst = std::max(worst, std::fabs(lib - std::log(prob)));
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t = 1 + rng() % 8;
    const std::size_t v = 2 + rng() % 3;
    const Matrix lp = random_logp(t, v, rng);
    const Matrix p = exp_of(lp);
    const std::size_t n = 1 + rng() % std::min<std::size_t>(t, 4);
    std::uniform_int_distribution<int> tok(1, static_cast<int>(v) - 1);
    std::vector<int> target(n);
    for (int& y : target) y = tok(rng);
    ++instances;

    const double label = ctc::brute_force_ctc_oracle(p, ctc::OracleMode::kLabel, target);
    const auto loss = ctc::ctc_loss(Value::constant(lp), target);
    if (label > 0.0) compare(-loss.loss.item(), label);
    else if (loss.feasible) support_mismatch = true;

    ctc::PrefixOptions opt;
    opt.eos = static_cast<int>(v);
    const int total = static_cast<int>(t);
    auto state = ctc::initial_prefix_state();
    std::vector<int> g;
    for (int q : target) {
      std::vector<int> h = g;
      h.push_back(q);
      const double prefix = ctc::brute_force_ctc_oracle(p, ctc::OracleMode::kPrefix, h);
      const auto off = ctc::prefix_score_offline(g, q, state, lp, opt);
      const auto on = ctc::prefix_score_online(g, q, state, lp, total, total, opt);
      compare(off.score, prefix);
      compare(on.score, prefix);
      state = off.state;
      g = std::move(h);
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = std::to_string(instances) + " instances, max |delta| " + fmt("%.2e", worst) + ", " +
             fmt("%.1fs", secs);
  v.require(instances >= 200, "fewer than 200 instances");
  v.require(worst < 1e-9, "deviation above 1e-9");
  v.require(!support_mismatch, "zero-probability sequence scored above the sentinel");
  v.require(secs < 60.0, "runtime above 1 min");
  return v;
}

// ---------------------------------------------------------------------------
// 2. [eos] branch of the online prefix score, in isolation and in the beam.

Verdict criterion_eos_branch() {
  std::mt19937_64 rng(20260202);
  Verdict v;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int total = 2 + static_cast<int>(rng() % 9);
    const std::size_t vocab = 5;
    const Matrix lp = random_logp(static_cast<std::size_t>(total), vocab, rng);
    ctc::PrefixOptions opt;
    opt.eos = 2;
    std::uniform_int_distribution<int> tok(3, static_cast<int>(vocab) - 1);
    std::vector<int> g(static_cast<std::size_t>(rng() % 4));
    for (int& y : g) y = tok(rng);
    for (int h = 1; h <= total; ++h) {
      auto state = ctc::initial_prefix_state();
      std::vector<int> prefix;
      for (int q : g) {
        state = ctc::prefix_score_online(prefix, q, state, lp, h, total, opt).state;
        prefix.push_back(q);
      }
      state = ctc::extend_horizon(state, lp, h);
      const double eos = ctc::prefix_score_online(prefix, opt.eos, state, lp, h, total, opt).score;
      if (h < total) {
        v.require(eos == kLogSentinel, "eos below the last frame is not the sentinel");
      } else {
        const auto last = static_cast<std::size_t>(total - 1);
        const double expect = std::max(ad::log_add(state->gamma_n[last], state->gamma_b[last]), kLogSentinel);
        v.require(eos == expect, "eos at the last frame differs from log(gamma_n + gamma_b)");
        const double off = ctc::prefix_score_offline(prefix, opt.eos, state, lp, opt).score;
        v.require(eos == off, "online and offline eos differ");
      }
      ++checked;
    }
  }

  // No live hypothesis carries [eos] before the input is complete.
  nn::ModelConfig cfg;
  cfg.vocab_size = 8;
  const nn::LsTransducer model(cfg, 3);
  int beam_checks = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::mt19937_64 frng(seed);
    const Matrix frames = random_matrix(20, static_cast<std::size_t>(cfg.feat_dim), frng, -2, 2);
    decode::StreamingDecoder dec(model, decode::BeamConfig{});
    for (std::size_t t = 0; t < frames.rows(); ++t) {
      dec.accept_frames(ad::slice_rows(Value::constant(frames), t, t + 1).data());
      for (const auto& h : dec.live()) {
        ++beam_checks;
        v.require(!h.done, "hypothesis finished before the last frame");
        for (std::size_t k = 1; k < h.tokens.size(); ++k)
          v.require(h.tokens[k] != nn::Vocabulary::kSosEos, "eos entered the beam early");
      }
    }
    dec.finish();
  }
  v.detail = std::to_string(checked) + " horizon checks, " + std::to_string(beam_checks) + " live hypotheses";
  return v;
}

// ---------------------------------------------------------------------------
// 3. CIF worked example.

Verdict criterion_cif_example() {
  Verdict v;
  std::mt19937_64 rng(20260303);
  const std::vector<double> alpha{0.2, 0.9, 0.2, 0.3, 0.6, 0.1};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix e = random_matrix(6, 5, rng, -3, 3);
    const auto res = align::cif_integrate(e, alpha, align::CifTail::kDiscard);
    if (res.C.rows() < 2) {
      v.require(false, "fewer than two labels fired");
      break;
    }
    for (std::size_t c = 0; c < 5; ++c) {
      const double c1 = 0.2 * e(0, c) + 0.8 * e(1, c);
      const double c2 = 0.1 * e(1, c) + 0.2 * e(2, c) + 0.3 * e(3, c) + 0.4 * e(4, c);
      worst = std::max({worst, std::fabs(res.C(0, c) - c1), std::fabs(res.C(1, c) - c2)});
    }
  }
  v.require(worst <= 1e-12, "elementwise deviation above 1e-12");
  v.detail = "max deviation " + fmt("%.2e", worst) + " over 100 random E";
  return v;
}

// ---------------------------------------------------------------------------
// 4. AIF boundaries for crossings at frames 5 and 11.

Verdict criterion_aif_boundaries() {
  Verdict v;
  std::mt19937_64 rng(20260404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int draws = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // Cumulative sum <= 1 through frame 4, > 1 at 5, <= 2 through 10, > 2 at 11.
    const std::size_t len = 11 + rng() % 6;
    std::vector<double> a(len);
    const double s4 = 1.0 * u(rng);
    for (int t = 0; t < 4; ++t) a[t] = s4 / 4;
    const double s5 = 1.0 + 1e-6 + (0.999 - 1e-6) * u(rng);
    a[4] = s5 - s4;
    const double s10 = s5 + (2.0 - s5) * u(rng);
    for (int t = 5; t < 10; ++t) a[t] = (s10 - s5) / 5;
    a[10] = (2.0 + 1e-6 + u(rng)) - s10;
    for (std::size_t t = 11; t < len; ++t) a[t] = u(rng);
    const auto cum = align::prefix_sums(a);
    if (!(cum[3] <= 1.0 && cum[4] > 1.0 && cum[9] <= 2.0 && cum[10] > 2.0)) continue;
    ++draws;
    const auto b = align::aif_boundaries(a, 2);
    v.require(b == std::vector<int>({4, 10}), "boundaries differ from {4, 10}");
    if (!v.pass) break;
  }
  v.require(draws >= 500, "too few valid draws");
  v.detail = std::to_string(draws) + " weight sequences give T_1 = 4, T_2 = 10";
  return v;
}

// ---------------------------------------------------------------------------
// 5. Finite-difference check of the training loss.

Verdict criterion_gradcheck() {
  const auto t0 = Clock::now();
  nn::ModelConfig mc;
  train::SynthSpec spec;
  const train::Lexicon lexicon(spec);
  const auto data = train::synth_dataset(lexicon, train::Domain::kSource, 3, 55);
  nn::LsTransducer model(mc, 56);
  train::TrainConfig tc;
  double worst = 0.0, strict = 0.0;
  std::size_t entries = 0;
  std::set<std::string> groups;
  for (const auto& u : data) {
    const auto report = train::check_lst_loss_gradients(model, u, tc, 4, 57);
    worst = std::max(worst, report.max_rel_error);
    strict = std::max(strict, report.max_strict_rel_error);
    entries += report.entries.size();
    for (const auto& e : report.entries) groups.insert(e.path.substr(0, e.path.find('.')));
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = std::to_string(entries) + " entries in " + std::to_string(groups.size()) + " modules, max rel " +
             fmt("%.2e", worst) + " (" + fmt("%.2e", strict) + " with a 1e-8 floor), " + fmt("%.1fs", secs);
  v.require(entries >= 20, "fewer than 20 entries");
  v.require(worst < 1e-4, "relative error above 1e-4");
  v.require(secs < 120.0, "runtime above 2 min");
  return v;
}

// ---------------------------------------------------------------------------
// 6. AIF parallel/sequential equality and streaming causality.

Verdict criterion_aif_causality() {
  Verdict v;
  std::mt19937_64 rng(20260606);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t t = 4 + rng() % 20;
    const std::size_t labels = 1 + rng() % 6;
    const Value mem = Value::constant(random_matrix(t, 6, rng, -2, 2));
    const Value q = Value::constant(random_matrix(labels, 6, rng, -2, 2));
    std::vector<double> alpha(t);
    for (double& a : alpha) a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto b = align::aif_boundaries(alpha, static_cast<int>(labels));
    const auto par = align::aif_extract(mem, q, b);
    const auto seq = align::aif_extract_sequential(mem, q, b);
    v.require(par.C.data() == seq.C.data(), "masked extraction differs from the sequential loop");
    if (!v.pass) return v;
  }

  // Full model: frames after T_j leave c_j, the transducer step score and the
  // online CTC score at horizon T_j untouched.
  nn::ModelConfig cfg;
  cfg.vocab_size = 10;
  const nn::LsTransducer model(cfg, 7);
  ad::NoGradGuard guard;
  int perturbed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 frng(seed);
    const Matrix frames = random_matrix(24, static_cast<std::size_t>(cfg.feat_dim), frng, -2, 2);
    std::vector<int> tokens{nn::Vocabulary::kSosEos};
    std::uniform_int_distribution<int> tok(3, cfg.vocab_size - 1);
    for (int k = 0; k < 6; ++k) tokens.push_back(tok(frng));
    const auto pred = model.predict(std::span<const int>(tokens).subspan(1));  // [sos] is implicit

    auto label_scores = [&](const Matrix& x, int j, int horizon) {
      const auto enc = model.encode(x);
      const Value memory = model.aif_memory(enc);
      const Value c = align::aif_extract_one(memory, ad::slice_rows(pred.d_inter, j, j + 1), horizon);
      const Matrix step = decode::lst_step_score(model, c, ad::slice_rows(pred.h_pre, j, j + 1));
      const Matrix logp = model.ctc_log_probs(enc).data();
      std::vector<double> ctc_scores;
      auto state = ctc::initial_prefix_state();
      std::vector<int> g;
      const int total = static_cast<int>(x.rows());
      for (int k = 1; k <= j; ++k) {
        state = ctc::prefix_score_online(g, tokens[k], state, logp, horizon, total).state;
        g.push_back(tokens[k]);
      }
      for (int qv = 2; qv < cfg.vocab_size; ++qv)
        ctc_scores.push_back(ctc::prefix_score_online(g, qv, state, logp, horizon, total).score);
      return std::make_tuple(c.data(), step, ctc_scores);
    };

    const auto alpha = align::column_values(align::frame_weights(model.encode(frames).E).alpha);
    const auto b = align::aif_boundaries(alpha, 6);
    for (int j = 0; j < 6; ++j) {
      const int horizon = std::max(b[static_cast<std::size_t>(j)], 1);
      if (horizon >= static_cast<int>(frames.rows())) continue;
      Matrix moved = frames;
      for (std::size_t r = static_cast<std::size_t>(horizon); r < moved.rows(); ++r)
        for (double& x : moved.row_span(r)) x += 3.0 + static_cast<double>(r);
      v.require(label_scores(frames, j, horizon) == label_scores(moved, j, horizon),
                "frames beyond the boundary changed a score at that horizon");
      ++perturbed;
    }
  }
  v.require(perturbed >= 20, "too few perturbation checks");
  v.detail = "200 random extractions bit-exact, " + std::to_string(perturbed) + " perturbation checks";
  return v;
}

// ---------------------------------------------------------------------------
// 7-9. End-to-end toy task, five seeds.

struct SeedRun {
  std::uint64_t seed = 0;
  double seconds = 0.0;     // pre-training, training and source decoding
  double count_error = 0.0;
  double src_beta03 = 0.0, src_beta0 = 0.0, src_greedy = 0.0, src_no_eos_mod = 0.0;
  double tgt_unadapted = 0.0, tgt_adapted = 0.0, tgt_fused = 0.0;
  bool frozen_identical = true;
};

double token_error(const nn::LsTransducer& model, const train::Dataset& data, const decode::BeamConfig& bc,
                   const nn::PredictionLm* lm = nullptr) {
  std::vector<std::vector<int>> refs, hyps;
  for (const auto& u : data) {
    const auto res = decode::decode_utterance(model, u.feats, bc, lm);
    refs.push_back(u.tokens);
    hyps.push_back(res.nbest.empty() ? std::vector<int>{} : res.nbest.front().output());
  }
  return train::token_error_rate(refs, hyps).rate();
}

SeedRun run_toy_seed(std::uint64_t seed) {
  SeedRun r;
  r.seed = seed;
  train::SynthSpec spec;
  nn::ModelConfig mc;
  train::TrainConfig tc;
  tc.gamma = 0.5;
  tc.mu = 0.05;
  tc.epochs = 20;
  tc.seed = seed;
  decode::BeamConfig bc;
  bc.beam = 10;
  bc.ctc_weight = 0.3;

  const train::Lexicon lexicon(spec);
  const auto train_set = train::synth_dataset(lexicon, train::Domain::kSource, 2000, seed * 10 + 1);
  const auto src_test = train::synth_dataset(lexicon, train::Domain::kSource, 100, seed * 10 + 2);
  const auto tgt_test = train::synth_dataset(lexicon, train::Domain::kTarget, 100, seed * 10 + 3);
  const auto tgt_text = train::synth_text(lexicon, train::Domain::kTarget, 2000, seed * 10 + 4);
  const auto src_text = train::synth_text(lexicon, train::Domain::kSource, 2000, seed * 10 + 5);

  const auto t0 = Clock::now();
  nn::PredictionLm source_lm(mc, seed + 500);
  train::pretrain_lm(source_lm, src_text, tc);
  nn::LsTransducer model(mc, seed);
  train::load_prediction_network(model, source_lm);
  train::train(model, train_set, tc);

  {
    ad::NoGradGuard guard;
    double total = 0.0;
    for (const auto& u : src_test) total += std::fabs(train::lst_loss(model, u, tc).alpha_sum - u.num_tokens());
    r.count_error = total / static_cast<double>(src_test.size());
  }
  r.src_beta03 = token_error(model, src_test, bc);
  r.seconds = seconds_since(t0);

  decode::BeamConfig b0 = bc;
  b0.ctc_weight = 0.0;
  r.src_beta0 = token_error(model, src_test, b0);
  decode::BeamConfig greedy = b0;
  greedy.beam = 1;
  r.src_greedy = token_error(model, src_test, greedy);
  decode::BeamConfig no_mod = bc;
  no_mod.eos_modification = false;
  r.src_no_eos_mod = token_error(model, src_test, no_mod);

  r.tgt_unadapted = token_error(model, tgt_test, bc);
  std::map<std::string, Matrix> before;
  for (const auto& [path, val] : model.params().entries()) before.emplace(path, val.data());
  train::adapt_prediction_network(model, tgt_text, tc);
  for (const auto& [path, val] : model.params().entries()) {
    const bool adaptable = nn::PredictionNetwork::is_adaptable(path, tc.freeze_below);
    if (!adaptable && !(val.data() == before.at(path))) r.frozen_identical = false;
  }
  r.tgt_adapted = token_error(model, tgt_test, bc);

  // Target-domain LM: the source LM fine-tuned on target text.
  nn::PredictionLm target_lm(mc, seed + 1000);
  target_lm.params().copy_from(source_lm.params());
  train::pretrain_lm(target_lm, tgt_text, tc);
  decode::BeamConfig fused = bc;
  fused.lm_weight = 0.2;
  r.tgt_fused = token_error(model, tgt_test, fused, &target_lm);
  return r;
}

double mean_of(const std::vector<SeedRun>& runs, double SeedRun::*field) {
  double s = 0.0;
  for (const auto& r : runs) s += r.*field;
  return s / static_cast<double>(runs.size());
}

double median_of(const std::vector<SeedRun>& runs, double SeedRun::*field) {
  std::vector<double> xs;
  for (const auto& r : runs) xs.push_back(r.*field);
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Verdict criterion_toy_task(const std::vector<SeedRun>& runs) {
  Verdict v;
  double secs = 0.0;
  for (const auto& r : runs) secs += r.seconds;
  const double median = median_of(runs, &SeedRun::src_beta03);
  const double count = mean_of(runs, &SeedRun::count_error);
  v.detail = "median token error " + fmt("%.4f", median) + ", mean |sum(alpha) - L| " + fmt("%.3f", count) +
             ", " + fmt("%.0fs", secs) + " for " + std::to_string(runs.size()) + " seeds";
  v.require(median <= 0.05, "median token error above 5%");
  v.require(count < 0.5, "count error not below 0.5");
  v.require(secs < 900.0, "runtime above 15 min");
  return v;
}

Verdict criterion_adaptation(const std::vector<SeedRun>& runs) {
  Verdict v;
  const double un = mean_of(runs, &SeedRun::tgt_unadapted);
  const double ad = mean_of(runs, &SeedRun::tgt_adapted);
  const double fu = mean_of(runs, &SeedRun::tgt_fused);
  v.detail = "target error unadapted " + fmt("%.4f", un) + ", adapted " + fmt("%.4f", ad) + ", adapted + LM " +
             fmt("%.4f", fu);
  v.require(ad < un, "adaptation did not lower the error");
  v.require(fu <= ad, "fusion raised the error");
  for (const auto& r : runs) v.require(r.frozen_identical, "frozen parameter changed (seed " + std::to_string(r.seed) + ")");
  return v;
}

Verdict criterion_joint_decoding(const std::vector<SeedRun>& runs) {
  Verdict v;
  const double b3 = mean_of(runs, &SeedRun::src_beta03);
  const double b0 = mean_of(runs, &SeedRun::src_beta0);
  const double ne = mean_of(runs, &SeedRun::src_no_eos_mod);
  const double gr = mean_of(runs, &SeedRun::src_greedy);
  v.detail = "beta 0.3 " + fmt("%.4f", b3) + ", beta 0 " + fmt("%.4f", b0) + ", no eos rule " + fmt("%.4f", ne) +
             " (greedy " + fmt("%.4f", gr) + ")";
  v.require(b3 <= b0, "beta 0.3 worse than beta 0");
  v.require(ne > b3, "disabling the eos rule did not degrade");
  return v;
}

// ---------------------------------------------------------------------------
// 10. CLI determinism.

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict criterion_determinism() {
  namespace fs = std::filesystem;
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / ("lst_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = LST_CLI_PATH;
  const std::string quiet = " >/dev/null 2>" + (dir / "stderr.txt").string();
  const std::string train_data = (dir / "train.txt").string();
  const std::string test_data = (dir / "test.txt").string();
  v.require(shell(cli + " synth --count 200 --seed 11 --out " + train_data + quiet) == 0, "synth failed");
  v.require(shell(cli + " synth --count 30 --seed 12 --out " + test_data + quiet) == 0, "synth failed");
  std::string ckpt[2], nbest[2];
  for (int k = 0; k < 2 && v.pass; ++k) {
    const std::string m = (dir / ("run" + std::to_string(k) + ".ckpt")).string();
    const std::string n = (dir / ("run" + std::to_string(k) + ".nbest")).string();
    v.require(shell(cli + " train --data " + train_data + " --set epochs=3 --seed 21 --out " + m + quiet) == 0,
              "train failed");
    v.require(shell(cli + " decode --model " + m + " --data " + test_data + " --beta 0.3 --beam 10 --out " + n +
                    quiet) == 0,
              "decode failed");
    ckpt[k] = slurp(m);
    nbest[k] = slurp(n);
  }
  if (v.pass) {
    v.require(!ckpt[0].empty() && !nbest[0].empty(), "empty artifacts");
    v.require(ckpt[0] == ckpt[1], "checkpoints differ");
    v.require(nbest[0] == nbest[1], "n-best files differ");
    v.detail = std::to_string(ckpt[0].size()) + "-byte checkpoints and " + std::to_string(nbest[0].size()) +
               "-byte n-best files identical across two runs";
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  int seeds = 5;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string item; std::getline(ss, item, ',');) only.insert(std::stoi(item));
    } else if (arg == "--seeds" && i + 1 < argc) {
      seeds = std::stoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N[,M...]] [--seeds K]\n");
      return 2;
    }
  }
  auto wanted = [&only](int n) { return only.empty() || only.count(n) != 0; };

  const std::map<int, const char*> titles{
      {1, "CTC oracle equivalence"},
      {2, "[eos] branch of the online prefix score"},
      {3, "CIF worked example"},
      {4, "AIF boundary trace"},
      {5, "gradient check of the training loss"},
      {6, "AIF parallel/sequential equality and causality"},
      {7, "end-to-end toy task"},
      {8, "adaptation direction"},
      {9, "joint-decoding ablation direction"},
      {10, "train + decode determinism"},
  };
  const std::map<int, std::function<Verdict()>> isolated{
      {1, criterion_ctc_oracle},    {2, criterion_eos_branch},     {3, criterion_cif_example},
      {4, criterion_aif_boundaries}, {5, criterion_gradcheck},      {6, criterion_aif_causality},
      {10, criterion_determinism},
  };

  std::map<int, Verdict> results;
  auto run_guarded = [](const std::function<Verdict()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      Verdict v;
      v.require(false, std::string("exception: ") + e.what());
      return v;
    }
  };
  auto report = [&](int n, const Verdict& v) {
    results[n] = v;
    std::printf("criterion %d: %s  %s (%s)\n", n, v.pass ? "PASS" : "FAIL", titles.at(n), v.detail.c_str());
    std::fflush(stdout);
  };

  for (const auto& [n, fn] : isolated)
    if (n < 7 && wanted(n)) report(n, run_guarded(fn));

  if (wanted(7) || wanted(8) || wanted(9)) {
    std::vector<SeedRun> runs;
    for (int s = 1; s <= seeds; ++s) {
      try {
        runs.push_back(run_toy_seed(static_cast<std::uint64_t>(s)));
        const auto& r = runs.back();
        std::printf(
            "  seed %d: %.0fs count %.3f | source beta0.3 %.4f beta0 %.4f greedy %.4f no-eos-rule %.4f | "
            "target %.4f -> %.4f -> %.4f\n",
            s, r.seconds, r.count_error, r.src_beta03, r.src_beta0, r.src_greedy, r.src_no_eos_mod,
            r.tgt_unadapted, r.tgt_adapted, r.tgt_fused);
        std::fflush(stdout);
      } catch (const std::exception& e) {
        std::printf("  seed %d: exception: %s\n", s, e.what());
      }
    }
    auto gated = [&runs, seeds](const std::function<Verdict(const std::vector<SeedRun>&)>& fn) {
      if (static_cast<int>(runs.size()) != seeds) {
        Verdict v;
        v.require(false, "a seed did not complete");
        return v;
      }
      return fn(runs);
    };
    if (wanted(7)) report(7, gated(criterion_toy_task));
    if (wanted(8)) report(8, gated(criterion_adaptation));
    if (wanted(9)) report(9, gated(criterion_joint_decoding));
  }

  if (wanted(10)) report(10, run_guarded(criterion_determinism));

  int failed = 0;
  for (const auto& [n, v] : results) failed += v.pass ? 0 : 1;
  std::printf("%zu criteria run, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
