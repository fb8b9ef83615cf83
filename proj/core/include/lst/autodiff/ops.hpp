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


#ifndef LST_AUTODIFF_OPS_HPP_
#define LST_AUTODIFF_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "lst/autodiff/value.hpp"

namespace lst::ad {

// Differentiable primitives. Binary elementwise ops accept a right operand
// that is either the same shape as the left one, a 1 x cols row vector, or a
// rows x 1 column vector; anything else raises DimensionError naming the
// primitive and both shapes.

Value matmul(const Value& a, const Value& b);
// a * b^T
Value matmul_nt(const Value& a, const Value& b);
Value transpose(const Value& a);

Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double s);
Value add_scalar(const Value& a, double s);

Value sigmoid(const Value& a);
Value tanh(const Value& a);
Value relu(const Value& a);
// Tanh approximation of the Gaussian error linear unit; smooth everywhere.
Value gelu(const Value& a);
Value abs(const Value& a);

Value softmax_rows(const Value& a);
Value log_softmax_rows(const Value& a);

// Row i of the result is row ids[i] of `table`.
Value embedding(const Value& table, std::span<const int> ids);
Value concat_cols(const std::vector<Value>& parts);
Value concat_rows(const std::vector<Value>& parts);
// Columns [begin, end).
Value slice_cols(const Value& a, std::size_t begin, std::size_t end);
// Rows [begin, end).
Value slice_rows(const Value& a, std::size_t begin, std::size_t end);

// Per-row normalisation followed by a 1 x cols gain and bias.
Value layer_norm(const Value& x, const Value& gain, const Value& bias, double eps = 1e-5);

// Sum over rows of -log softmax(logits)[r, targets[r]]. Returns 1x1.
Value cross_entropy_with_logits(const Value& logits, std::span<const int> targets);

Value sum(const Value& a);
Value mean(const Value& a);

// Entries where mask is nonzero are replaced by `fill`; they receive no
// gradient. `mask` must match the shape of `a`.
Value masked_fill(const Value& a, const std::vector<unsigned char>& mask, double fill);

// Overloads for readability in model code.
inline Value operator+(const Value& a, const Value& b) { return add(a, b); }
inline Value operator-(const Value& a, const Value& b) { return sub(a, b); }
inline Value operator*(double s, const Value& a) { return scale(a, s); }

}  // namespace lst::ad

#endif  // LST_AUTODIFF_OPS_HPP_
