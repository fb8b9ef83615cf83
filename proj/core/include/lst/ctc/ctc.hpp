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


#ifndef LST_CTC_CTC_HPP_
#define LST_CTC_CTC_HPP_

#include <memory>
#include <span>
#include <vector>

#include "lst/autodiff/ops.hpp"

namespace lst::ctc {

using ad::Matrix;
using ad::Value;

// ---------------------------------------------------------------------------
// CTC loss over a blank-interleaved lattice.

// True when some alignment of `target` fits in `frames` frames (one extra
// frame for every adjacent repeat).
bool ctc_feasible(std::size_t frames, std::span<const int> target);

// log p(target | logp), -inf when infeasible. `logp` is T x V with rows
// normalised in log space.
double ctc_log_likelihood(const Matrix& logp, std::span<const int> target, int blank = 0);

struct CtcLoss {
  Value loss;     // 1x1 negative log-likelihood, +inf when infeasible
  bool feasible = true;
};

// Differentiable through `logp`. Infeasible targets give +inf with no
// gradient and feasible == false.
CtcLoss ctc_loss(const Value& logp, std::span<const int> target, int blank = 0);

// ---------------------------------------------------------------------------
// Prefix scoring.

// Forward variables of a prefix g over frames [0, horizon): gamma_n ends in
// a non-blank, gamma_b in a blank (log domain). States are immutable and
// share their ancestors, so extending a horizon rebuilds only the chain.
struct PrefixState {
  std::vector<int> prefix;  // tokens after [sos]
  int horizon = 0;
  std::vector<double> gamma_n;
  std::vector<double> gamma_b;
  double log_psi = 0.0;  // log p(prefix, ... | frames [0, horizon))
  std::shared_ptr<const PrefixState> parent;

  // Last token, or -1 for the empty prefix ([sos] has no CTC label).
  int last() const { return prefix.empty() ? -1 : prefix.back(); }
};
using PrefixStatePtr = std::shared_ptr<const PrefixState>;

struct PrefixOptions {
  int blank = 0;
  int eos = 2;
  // When false, [eos] is scored as a complete hypothesis at any horizon
  // (the unmodified online rule).
  bool eos_modification = true;
};

struct PrefixScore {
  double score = 0.0;     // floored at kLogSentinel
  PrefixStatePtr state;   // state of g.q; null for q == eos
};

// State of the empty prefix at horizon 0.
PrefixStatePtr initial_prefix_state();

// Continues every level of the chain over frames [state->horizon, horizon).
// Results are bit-identical to computing the state from scratch.
PrefixStatePtr extend_horizon(const PrefixStatePtr& state, const Matrix& logp, int horizon,
                              int blank = 0);

// Online score of h = g.q using frames [0, horizon) of `logp`. `g_tokens`
// must equal state->prefix. For q == eos: complete-hypothesis score when
// horizon == total_frames, kLogSentinel otherwise (see PrefixOptions).
PrefixScore prefix_score_online(std::span<const int> g_tokens, int q, const PrefixStatePtr& state,
                                const Matrix& logp, int horizon, int total_frames,
                                const PrefixOptions& options = {});

// Offline score: horizon is the full utterance.
PrefixScore prefix_score_offline(std::span<const int> g_tokens, int q, const PrefixStatePtr& state,
                                 const Matrix& logp, const PrefixOptions& options = {});

// ---------------------------------------------------------------------------
// Enumeration oracle.

enum class OracleMode {
  kLabel,   // P(collapsed path == sequence)
  kPrefix,  // P(collapsed path starts with sequence), exact match included
};

// Enumerates all V^T alignment paths of `probs` (T x V, linear probabilities),
// collapsing repeats then removing blanks. Refuses (ContractError) when
// V^T > 1e7.
double brute_force_ctc_oracle(const Matrix& probs, OracleMode mode, std::span<const int> sequence,
                              int blank = 0);

}  // namespace lst::ctc

#endif  // LST_CTC_CTC_HPP_
