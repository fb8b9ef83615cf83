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


#ifndef LST_ALIGNMENT_ALIGNMENT_HPP_
#define LST_ALIGNMENT_ALIGNMENT_HPP_

#include <span>
#include <vector>

#include "lst/autodiff/ops.hpp"

namespace lst::align {

using ad::Matrix;
using ad::Value;

// alpha[t] = sigmoid(E[t, d-1]); w_phone[t] = sigmoid(E[t, d-2]). Both T x 1.
struct FrameWeights {
  Value alpha;
  Value w_phone;
};

FrameWeights frame_weights(const Value& E);

std::vector<double> column_values(const Value& v);

// Per-frame weights plus their running sums and the fired label boundaries.
struct AlignmentPlan {
  std::vector<double> alpha;
  std::vector<double> w_phone;
  std::vector<double> cumsum;
  std::vector<int> boundaries;  // T_j as frame counts, 0 <= T_j <= T
};

// Left-to-right running sum, accumulated in frame order.
std::vector<double> prefix_sums(std::span<const double> alpha);

// T_j = (first 1-based frame t with cumsum[t] > j) - 1, or T when the sum
// never strictly exceeds j. Equality does not fire.
std::vector<int> aif_boundaries(std::span<const double> alpha, int num_labels);
// Same rule from precomputed prefix sums; `frames_final` says whether all
// frames have arrived. Returns -1 when T_j is not yet determined.
int boundary_for_label(std::span<const double> cumsum, int label, bool frames_final);

AlignmentPlan make_plan(std::span<const double> alpha, std::span<const double> w_phone,
                        int num_labels);

// alpha_t * L / sum(alpha). Throws NumericError when sum(alpha) <= 0 and
// ContractError when L < 1.
std::vector<double> cif_scale(std::span<const double> alpha, int num_labels);

enum class CifTail {
  kFirePartial,  // decode: emit the residual below 1.0 as a final label
  kDiscard,      // scaled training: drop it
};

struct CifResult {
  Matrix C;             // one row per fired label
  int full_fires = 0;   // fires that reached a full unit of weight
  bool tail_fired = false;
  // Contribution weight of every frame to every fired label.
  Matrix weights;
};

// Integrate-and-fire over E (T x d). A chunk fires when its accumulated
// weight reaches 1.0 (within 1e-9); the crossing weight is split so the chunk
// sums to exactly one and the remainder opens the next chunk.
CifResult cif_integrate(const Matrix& E, std::span<const double> alpha, CifTail tail);

struct AifOptions {
  bool scale_qk = true;     // divide scores by sqrt(query dim)
  bool keep_attn = false;   // retain the L x T attention matrix
};

// Label-level representations c_1..c_L plus optional attention weights.
struct LabelRepr {
  Value C;
  Matrix attn;
};

// Masked parallel extraction (teacher forcing): c_j attends over memory rows
// [0, max(T_j, 1)) with query row j. `memory` holds keys == values.
LabelRepr aif_extract(const Value& memory, const Value& queries, std::span<const int> boundaries,
                      const AifOptions& options = {});

// Reference path: one label at a time over the truncated memory. Produces the
// same bits as aif_extract.
LabelRepr aif_extract_sequential(const Value& memory, const Value& queries,
                                 std::span<const int> boundaries, const AifOptions& options = {});

// Single label (decoder path): `query` is 1 x d, attends over rows [0, horizon).
Value aif_extract_one(const Value& memory, const Value& query, int horizon,
                      const AifOptions& options = {}, Matrix* attn = nullptr);

// |sum(alpha) - L| + |sum(w) - P|, differentiable through alpha and w.
Value quantity_loss(const Value& alpha, const Value& w_phone, int num_labels, int num_phones);

}  // namespace lst::align

#endif  // LST_ALIGNMENT_ALIGNMENT_HPP_
