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


#ifndef LST_NN_LAYERS_HPP_
#define LST_NN_LAYERS_HPP_

#include <string>

#include "lst/autodiff/ops.hpp"
#include "lst/autodiff/param_store.hpp"
#include "lst/rng.hpp"

namespace lst::nn {

using ad::Matrix;
using ad::ParamStore;
using ad::Value;

// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// x W (+ b). Parameters live at <prefix>.w and, when biased, <prefix>.b.
struct Linear {
  std::string prefix;
  bool has_bias = true;

  // `init_scale` shrinks the Glorot draw, e.g. for output classifiers that
  // should start close to uniform.
  static Linear create(ParamStore& params, const std::string& prefix, std::size_t in,
                       std::size_t out, bool bias, Rng& rng, double init_scale = 1.0);
  Value operator()(const ParamStore& params, const Value& x) const;
};

struct LayerNorm {
  std::string prefix;

  static LayerNorm create(ParamStore& params, const std::string& prefix, std::size_t dim);
  Value operator()(const ParamStore& params, const Value& x) const;
};

// Causal mask for an n x n score matrix: entry (i, j) is masked when j > i.
std::vector<unsigned char> causal_mask(std::size_t n);

// Pre-norm block: x + Attn(LN(x)) followed by h + FFN(LN(h)) with a GELU FFN, single-head
// attention restricted to positions <= the query position.
struct CausalBlock {
  std::string prefix;
  std::size_t dim = 0;

  static CausalBlock create(ParamStore& params, const std::string& prefix, std::size_t dim,
                            std::size_t ffn, Rng& rng);
  Value operator()(const ParamStore& params, const Value& x) const;
};

}  // namespace lst::nn

#endif  // LST_NN_LAYERS_HPP_
