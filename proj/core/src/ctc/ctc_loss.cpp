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


#include <cmath>
#include <limits>

#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"

namespace lst::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> extended_labels(std::span<const int> target, int blank) {
  std::vector<int> ext(2 * target.size() + 1, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

bool can_skip(const std::vector<int>& ext, std::size_t s, int blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

// log alpha over the extended lattice, T x S.
Matrix forward_variables(const Matrix& logp, const std::vector<int>& ext, int blank) {
  const std::size_t T = logp.rows(), S = ext.size();
  Matrix alpha(T, S, kNegInf);
  alpha(0, 0) = logp(0, static_cast<std::size_t>(ext[0]));
  if (S > 1) alpha(0, 1) = logp(0, static_cast<std::size_t>(ext[1]));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = ad::log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(ext, s, blank)) acc = ad::log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kNegInf ? kNegInf : acc + logp(t, static_cast<std::size_t>(ext[s]));
    }
  }
  return alpha;
}

void check_inputs(const Matrix& logp, std::span<const int> target, int blank) {
  if (logp.rows() == 0) throw ContractError("ctc_loss: no frames");
  for (int y : target) {
    if (y < 0 || static_cast<std::size_t>(y) >= logp.cols() || y == blank) {
      throw ContractError("ctc_loss: target id " + std::to_string(y) + " invalid for " +
                          std::to_string(logp.cols()) + " classes");
    }
  }
}

// Paths end in the last label or the trailing blank.
double total_log_prob(const Matrix& alpha) {
  const std::size_t T = alpha.rows(), S = alpha.cols();
  return S > 1 ? ad::log_add(alpha(T - 1, S - 1), alpha(T - 1, S - 2)) : alpha(T - 1, 0);
}

}  // namespace

bool ctc_feasible(std::size_t frames, std::span<const int> target) {
  std::size_t needed = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++needed;
  return frames >= needed;
}

double ctc_log_likelihood(const Matrix& logp, std::span<const int> target, int blank) {
  check_inputs(logp, target, blank);
  if (!ctc_feasible(logp.rows(), target)) return kNegInf;
  const auto ext = extended_labels(target, blank);
  return total_log_prob(forward_variables(logp, ext, blank));
}

CtcLoss ctc_loss(const Value& logp, std::span<const int> target, int blank) {
  const Matrix& lp = logp.data();
  check_inputs(lp, target, blank);
  if (!ctc_feasible(lp.rows(), target)) {
    return CtcLoss{Value::constant(Matrix(1, 1, std::numeric_limits<double>::infinity())), false};
  }
  const auto ext = extended_labels(target, blank);
  const std::size_t T = lp.rows(), S = ext.size();
  Matrix alpha = forward_variables(lp, ext, blank);
  const double log_z = total_log_prob(alpha);

  // Backward variables exclude the emission at t, so alpha * beta / Z is the
  // occupancy of lattice state s at frame t.
  Matrix beta(T, S, kNegInf);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = beta(t + 1, s) + lp(t + 1, static_cast<std::size_t>(ext[s]));
      if (s + 1 < S) {
        acc = ad::log_add(acc, beta(t + 1, s + 1) + lp(t + 1, static_cast<std::size_t>(ext[s + 1])));
      }
      if (s + 2 < S && can_skip(ext, s + 2, blank)) {
        acc = ad::log_add(acc, beta(t + 1, s + 2) + lp(t + 1, static_cast<std::size_t>(ext[s + 2])));
      }
      beta(t, s) = acc;
    }
  }
  Matrix occupancy(T, lp.cols(), 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      const double l = alpha(t, s) + beta(t, s) - log_z;
      if (l != kNegInf) occupancy(t, static_cast<std::size_t>(ext[s])) += std::exp(l);
    }

  Value loss = ad::make_result(Matrix(1, 1, -log_z), "ctc_loss", {logp},
                               [occupancy = std::move(occupancy)](ad::Node& out) {
                                 Matrix& g = out.parents[0]->ensure_grad();
                                 const double up = out.grad(0, 0);
                                 for (std::size_t i = 0; i < g.size(); ++i) g[i] -= up * occupancy[i];
                               });
  return CtcLoss{loss, true};
}

}  // namespace lst::ctc
