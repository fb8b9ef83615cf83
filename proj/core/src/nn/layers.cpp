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


#include "lst/nn/layers.hpp"

#include <cmath>
#include <limits>

namespace lst::nn {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-r, r);
  Matrix m(fan_in, fan_out);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

Linear Linear::create(ParamStore& params, const std::string& prefix, std::size_t in,
                      std::size_t out, bool bias, Rng& rng, double init_scale) {
  Matrix w = glorot(in, out, rng);
  for (double& v : w.values()) v *= init_scale;
  params.add(prefix + ".w", std::move(w));
  if (bias) params.add(prefix + ".b", Matrix(1, out));
  return Linear{prefix, bias};
}

Value Linear::operator()(const ParamStore& params, const Value& x) const {
  Value y = ad::matmul(x, params.get(prefix + ".w"));
  if (has_bias) y = ad::add(y, params.get(prefix + ".b"));
  return y;
}

LayerNorm LayerNorm::create(ParamStore& params, const std::string& prefix, std::size_t dim) {
  params.add(prefix + ".g", Matrix(1, dim, 1.0));
  params.add(prefix + ".b", Matrix(1, dim));
  return LayerNorm{prefix};
}

Value LayerNorm::operator()(const ParamStore& params, const Value& x) const {
  return ad::layer_norm(x, params.get(prefix + ".g"), params.get(prefix + ".b"));
}

std::vector<unsigned char> causal_mask(std::size_t n) {
  std::vector<unsigned char> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) mask[i * n + j] = 1;
  return mask;
}

CausalBlock CausalBlock::create(ParamStore& params, const std::string& prefix, std::size_t dim,
                                std::size_t ffn, Rng& rng) {
  LayerNorm::create(params, prefix + ".ln1", dim);
  Linear::create(params, prefix + ".attn.q", dim, dim, false, rng);
  Linear::create(params, prefix + ".attn.k", dim, dim, false, rng);
  Linear::create(params, prefix + ".attn.v", dim, dim, false, rng);
  Linear::create(params, prefix + ".attn.o", dim, dim, true, rng);
  LayerNorm::create(params, prefix + ".ln2", dim);
  Linear::create(params, prefix + ".ffn.1", dim, ffn, true, rng);
  Linear::create(params, prefix + ".ffn.2", ffn, dim, true, rng);
  return CausalBlock{prefix, dim};
}

Value CausalBlock::operator()(const ParamStore& params, const Value& x) const {
  const std::size_t n = x.rows();
  const Value a = LayerNorm{prefix + ".ln1"}(params, x);
  const Value q = Linear{prefix + ".attn.q", false}(params, a);
  const Value k = Linear{prefix + ".attn.k", false}(params, a);
  const Value v = Linear{prefix + ".attn.v", false}(params, a);
  Value scores = ad::scale(ad::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dim)));
  scores = ad::masked_fill(scores, causal_mask(n), -std::numeric_limits<double>::infinity());
  const Value attended = ad::matmul(ad::softmax_rows(scores), v);
  const Value h = ad::add(x, Linear{prefix + ".attn.o", true}(params, attended));

  const Value b = LayerNorm{prefix + ".ln2"}(params, h);
  const Value f = Linear{prefix + ".ffn.2", true}(
      params, ad::gelu(Linear{prefix + ".ffn.1", true}(params, b)));
  return ad::add(h, f);
}

}  // namespace lst::nn
