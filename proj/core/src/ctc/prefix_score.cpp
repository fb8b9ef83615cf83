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


#include <algorithm>
#include <cmath>
#include <limits>

#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"

namespace lst::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double floor_sentinel(double x) { return std::max(x, kLogSentinel); }

void require_rows(const Matrix& logp, int horizon) {
  if (horizon < 0 || static_cast<std::size_t>(horizon) > logp.rows()) {
    throw ContractError("prefix score: horizon " + std::to_string(horizon) + " exceeds the " +
                        std::to_string(logp.rows()) + " available posterior rows");
  }
}

// Runs the recursion of `child` (prefix g.q) over frames [from, to), given
// the parent's forward variables over at least `to` frames.
void advance(PrefixState& child, const PrefixState* parent, const Matrix& logp, int blank, int from,
             int to) {
  child.gamma_n.resize(static_cast<std::size_t>(to), kNegInf);
  child.gamma_b.resize(static_cast<std::size_t>(to), kNegInf);
  if (!parent) {
    // Empty prefix: only all-blank paths.
    for (int t = from; t < to; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      const double prev = t == 0 ? 0.0 : child.gamma_b[ut - 1];
      child.gamma_b[ut] = prev + logp(ut, static_cast<std::size_t>(blank));
      child.gamma_n[ut] = kNegInf;
    }
    child.horizon = to;
    return;
  }
  const int q = child.prefix.back();
  const auto uq = static_cast<std::size_t>(q);
  const bool repeat = parent->last() == q;
  for (int t = from; t < to; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    if (t == 0) {
      child.gamma_n[0] = parent->prefix.empty() ? logp(0, uq) : kNegInf;
      child.gamma_b[0] = kNegInf;
      child.log_psi = child.gamma_n[0];
      continue;
    }
    double phi = parent->gamma_b[ut - 1];
    if (!repeat) phi = ad::log_add(phi, parent->gamma_n[ut - 1]);
    child.gamma_n[ut] = ad::log_add(child.gamma_n[ut - 1], phi) + logp(ut, uq);
    child.gamma_b[ut] = ad::log_add(child.gamma_b[ut - 1], child.gamma_n[ut - 1]) +
                        logp(ut, static_cast<std::size_t>(blank));
    child.log_psi = ad::log_add(child.log_psi, phi + logp(ut, uq));
  }
  child.horizon = to;
}

}  // namespace

PrefixStatePtr initial_prefix_state() {
  auto s = std::make_shared<PrefixState>();
  s->horizon = 0;
  s->log_psi = 0.0;
  return s;
}

namespace {

PrefixStatePtr extend_impl(const PrefixStatePtr& state, const Matrix& logp, int horizon, int blank) {
  if (state->horizon >= horizon) return state;
  PrefixStatePtr parent;
  if (state->parent) parent = extend_impl(state->parent, logp, horizon, blank);
  auto next = std::make_shared<PrefixState>(*state);
  next->parent = parent;
  if (state->prefix.empty()) next->log_psi = 0.0;
  advance(*next, parent.get(), logp, blank, state->horizon, horizon);
  return next;
}

}  // namespace

PrefixStatePtr extend_horizon(const PrefixStatePtr& state, const Matrix& logp, int horizon,
                              int blank) {
  if (!state) throw ContractError("extend_horizon: null state");
  require_rows(logp, horizon);
  return extend_impl(state, logp, horizon, blank);
}

PrefixScore prefix_score_online(std::span<const int> g_tokens, int q, const PrefixStatePtr& state,
                                const Matrix& logp, int horizon, int total_frames,
                                const PrefixOptions& options) {
  if (!state) throw ContractError("prefix score: null state");
  if (!std::equal(g_tokens.begin(), g_tokens.end(), state->prefix.begin(), state->prefix.end())) {
    throw ContractError("prefix score: state does not belong to the given prefix");
  }
  if (horizon < 1) throw ContractError("prefix score: horizon must be >= 1");
  if (horizon > total_frames) {
    throw ContractError("prefix score: horizon " + std::to_string(horizon) +
                        " beyond utterance length " + std::to_string(total_frames));
  }
  if (q == options.blank) throw ContractError("prefix score: blank cannot extend a prefix");
  require_rows(logp, horizon);
  if (q != options.eos && (q < 0 || static_cast<std::size_t>(q) >= logp.cols())) {
    throw ContractError("prefix score: token " + std::to_string(q) + " outside vocabulary");
  }

  PrefixStatePtr g = state->horizon == horizon
                         ? state
                         : extend_impl(state, logp, horizon, options.blank);
  if (g->horizon != horizon) {
    throw ContractError("prefix score: state horizon " + std::to_string(g->horizon) +
                        " is ahead of requested horizon " + std::to_string(horizon));
  }

  if (q == options.eos) {
    if (options.eos_modification && horizon < total_frames) return PrefixScore{kLogSentinel, nullptr};
    const auto last = static_cast<std::size_t>(horizon - 1);
    return PrefixScore{floor_sentinel(ad::log_add(g->gamma_n[last], g->gamma_b[last])), nullptr};
  }

  auto child = std::make_shared<PrefixState>();
  child->prefix = g->prefix;
  child->prefix.push_back(q);
  child->parent = g;
  child->log_psi = kNegInf;
  advance(*child, g.get(), logp, options.blank, 0, horizon);
  return PrefixScore{floor_sentinel(child->log_psi), child};
}

PrefixScore prefix_score_offline(std::span<const int> g_tokens, int q, const PrefixStatePtr& state,
                                 const Matrix& logp, const PrefixOptions& options) {
  const int total = static_cast<int>(logp.rows());
  return prefix_score_online(g_tokens, q, state, logp, total, total, options);
}

}  // namespace lst::ctc
