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


#include "lst/alignment/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lst/common.hpp"

namespace lst::align {

FrameWeights frame_weights(const Value& E) {
  const std::size_t d = E.cols();
  if (d < 4) {
    throw DimensionError("frame_weights: encoder output needs >= 4 columns, got " +
                         E.data().shape_string());
  }
  return FrameWeights{ad::sigmoid(ad::slice_cols(E, d - 1, d)),
                      ad::sigmoid(ad::slice_cols(E, d - 2, d - 1))};
}

std::vector<double> column_values(const Value& v) { return v.data().values(); }

std::vector<double> prefix_sums(std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    acc += alpha[t];
    out[t] = acc;
  }
  return out;
}

int boundary_for_label(std::span<const double> cumsum, int label, bool frames_final) {
  const double threshold = static_cast<double>(label);
  for (std::size_t t = 0; t < cumsum.size(); ++t) {
    if (cumsum[t] > threshold) return static_cast<int>(t);
  }
  return frames_final ? static_cast<int>(cumsum.size()) : -1;
}

std::vector<int> aif_boundaries(std::span<const double> alpha, int num_labels) {
  if (num_labels < 1) throw ContractError("aif_boundaries: L must be >= 1");
  const auto cumsum = prefix_sums(alpha);
  std::vector<int> out(static_cast<std::size_t>(num_labels));
  for (int j = 1; j <= num_labels; ++j) {
    out[static_cast<std::size_t>(j - 1)] = boundary_for_label(cumsum, j, true);
  }
  return out;
}

AlignmentPlan make_plan(std::span<const double> alpha, std::span<const double> w_phone,
                        int num_labels) {
  AlignmentPlan plan;
  plan.alpha.assign(alpha.begin(), alpha.end());
  plan.w_phone.assign(w_phone.begin(), w_phone.end());
  plan.cumsum = prefix_sums(alpha);
  plan.boundaries = aif_boundaries(alpha, num_labels);
  return plan;
}

std::vector<double> cif_scale(std::span<const double> alpha, int num_labels) {
  if (num_labels < 1) throw ContractError("cif_scale: L must be >= 1");
  double total = 0.0;
  for (double a : alpha) total += a;
  if (!(total > 0.0)) throw NumericError("cif_scale: degenerate alignment, sum(alpha) <= 0");
  const double factor = static_cast<double>(num_labels) / total;
  std::vector<double> out(alpha.size());
  for (std::size_t t = 0; t < alpha.size(); ++t) out[t] = alpha[t] * factor;
  return out;
}

CifResult cif_integrate(const Matrix& E, std::span<const double> alpha, CifTail tail) {
  if (E.rows() != alpha.size()) {
    throw DimensionError("cif_integrate: " + std::to_string(alpha.size()) + " weights for " +
                         E.shape_string() + " frames");
  }
  constexpr double kFireTolerance = 1e-9;
  const std::size_t T = E.rows(), d = E.cols();
  std::vector<std::vector<double>> rows;       // fired representations
  std::vector<std::vector<double>> frame_wts;  // per fired label, weight of each frame
  std::vector<double> current(d, 0.0), current_w(T, 0.0);
  double accumulated = 0.0;
  int full = 0;

  auto integrate = [&](std::size_t t, double w) {
    for (std::size_t c = 0; c < d; ++c) current[c] += w * E(t, c);
    current_w[t] += w;
  };
  auto fire = [&]() {
    rows.push_back(current);
    frame_wts.push_back(current_w);
    std::fill(current.begin(), current.end(), 0.0);
    std::fill(current_w.begin(), current_w.end(), 0.0);
  };

  for (std::size_t t = 0; t < T; ++t) {
    double remaining = alpha[t];
    // A single large weight may close several chunks.
    while (accumulated + remaining >= 1.0 - kFireTolerance) {
      const double used = std::max(0.0, 1.0 - accumulated);
      const double take = std::min(used, remaining);
      integrate(t, take);
      remaining -= take;
      fire();
      ++full;
      accumulated = 0.0;
      if (remaining <= kFireTolerance) {
        remaining = 0.0;
        break;
      }
    }
    if (remaining > 0.0) {
      integrate(t, remaining);
      accumulated += remaining;
    }
  }

  CifResult result;
  result.full_fires = full;
  if (tail == CifTail::kFirePartial && accumulated > kFireTolerance) {
    fire();
    result.tail_fired = true;
  }
  result.C = Matrix(rows.size(), d);
  result.weights = Matrix(rows.size(), T);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::copy(rows[j].begin(), rows[j].end(), result.C.row_span(j).begin());
    std::copy(frame_wts[j].begin(), frame_wts[j].end(), result.weights.row_span(j).begin());
  }
  return result;
}

namespace {

int clamp_horizon(int boundary, std::size_t frames) {
  return std::clamp(boundary, 1, static_cast<int>(frames));
}

double qk_scale(const Value& queries, const AifOptions& options) {
  return options.scale_qk ? 1.0 / std::sqrt(static_cast<double>(queries.cols())) : 1.0;
}

}  // namespace

LabelRepr aif_extract(const Value& memory, const Value& queries, std::span<const int> boundaries,
                      const AifOptions& options) {
  const std::size_t L = boundaries.size(), T = memory.rows();
  if (L == 0) return LabelRepr{Value::constant(Matrix(0, memory.cols())), Matrix()};
  if (queries.rows() < L) {
    throw ContractError("aif_extract: " + std::to_string(L) + " boundaries but only " +
                        std::to_string(queries.rows()) + " queries");
  }
  if (T == 0) throw ContractError("aif_extract: empty memory");
  const Value q = queries.rows() == L ? queries : ad::slice_rows(queries, 0, L);
  std::vector<unsigned char> mask(L * T, 0);
  for (std::size_t j = 0; j < L; ++j) {
    const auto horizon = static_cast<std::size_t>(clamp_horizon(boundaries[j], T));
    for (std::size_t t = horizon; t < T; ++t) mask[j * T + t] = 1;
  }
  Value scores = ad::scale(ad::matmul_nt(q, memory), qk_scale(queries, options));
  scores = ad::masked_fill(scores, mask, -std::numeric_limits<double>::infinity());
  const Value attn = ad::softmax_rows(scores);
  LabelRepr out{ad::matmul(attn, memory), Matrix()};
  if (options.keep_attn) out.attn = attn.data();
  return out;
}

Value aif_extract_one(const Value& memory, const Value& query, int horizon,
                      const AifOptions& options, Matrix* attn) {
  if (memory.rows() == 0) throw ContractError("aif_extract: empty memory");
  const auto h = static_cast<std::size_t>(clamp_horizon(horizon, memory.rows()));
  const Value keys = h == memory.rows() ? memory : ad::slice_rows(memory, 0, h);
  const Value scores = ad::scale(ad::matmul_nt(query, keys), qk_scale(query, options));
  const Value weights = ad::softmax_rows(scores);
  if (attn) {
    *attn = Matrix(1, memory.rows());
    for (std::size_t t = 0; t < h; ++t) (*attn)(0, t) = weights(0, t);
  }
  return ad::matmul(weights, keys);
}

LabelRepr aif_extract_sequential(const Value& memory, const Value& queries,
                                 std::span<const int> boundaries, const AifOptions& options) {
  const std::size_t L = boundaries.size();
  if (L == 0) return LabelRepr{Value::constant(Matrix(0, memory.cols())), Matrix()};
  if (queries.rows() < L) {
    throw ContractError("aif_extract: " + std::to_string(L) + " boundaries but only " +
                        std::to_string(queries.rows()) + " queries");
  }
  std::vector<Value> rows;
  LabelRepr out;
  if (options.keep_attn) out.attn = Matrix(L, memory.rows());
  for (std::size_t j = 0; j < L; ++j) {
    Matrix row_attn;
    rows.push_back(aif_extract_one(memory, ad::slice_rows(queries, j, j + 1), boundaries[j],
                                   options, options.keep_attn ? &row_attn : nullptr));
    if (options.keep_attn) {
      std::copy(row_attn.values().begin(), row_attn.values().end(), out.attn.row_span(j).begin());
    }
  }
  out.C = ad::concat_rows(rows);
  return out;
}

Value quantity_loss(const Value& alpha, const Value& w_phone, int num_labels, int num_phones) {
  if (num_labels < 1 || num_phones < 1) {
    throw ContractError("quantity_loss: L and P must be >= 1");
  }
  const Value label_term = ad::abs(ad::add_scalar(ad::sum(alpha), -static_cast<double>(num_labels)));
  const Value phone_term =
      ad::abs(ad::add_scalar(ad::sum(w_phone), -static_cast<double>(num_phones)));
  return ad::add(label_term, phone_term);
}

}  // namespace lst::align
