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


#ifndef LST_NN_NETWORKS_HPP_
#define LST_NN_NETWORKS_HPP_

#include <span>
#include <vector>

#include "lst/nn/layers.hpp"
#include "lst/nn/model_config.hpp"

namespace lst::nn {

// Per-frame acoustic representation E (T x d). Column d-1 feeds alpha,
// column d-2 feeds the phone weights, columns 0..d-3 are content.
struct EncoderOutput {
  Value E;

  std::size_t frames() const { return E.rows(); }
  std::size_t dim() const { return E.cols(); }
  Value content() const { return ad::slice_cols(E, 0, dim() - 2); }
};

// Causal stack over input frames. Each frame is stacked with its predecessor
// and a position ramp before the input projection.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const ModelConfig& config, ParamStore& params, Rng& rng);

  EncoderOutput forward(const ParamStore& params, const Matrix& frames) const;

 private:
  ModelConfig config_;
  Linear input_;
  std::vector<CausalBlock> blocks_;
};

// Outputs of the label-side network for input [sos], y_1 .. y_N (N+1 rows).
struct PredNetOutput {
  Value d_inter;    // (N+1) x pred_dim, AIF queries
  Value h_pre;      // (N+1) x pred_dim, final-layer outputs
  Value lm_logits;  // (N+1) x V
};

// Causal Transformer language model over token ids. Parameters use the
// "pred." prefix so weights move path-for-path between a standalone LM and
// the transducer.
class PredictionNetwork {
 public:
  PredictionNetwork() = default;
  PredictionNetwork(const ModelConfig& config, ParamStore& params, Rng& rng);

  // `tokens` excludes [sos]; it is prepended here. Blank ids are rejected.
  PredNetOutput forward(const ParamStore& params, std::span<const int> tokens) const;

  // True when `path` belongs to a layer at or above `freeze_below`, or to the
  // final norm / LM classifier.
  static bool is_adaptable(const std::string& path, int freeze_below);

 private:
  ModelConfig config_;
  std::vector<CausalBlock> blocks_;
  LayerNorm final_norm_;
  Linear lm_head_;
};

// logits = C A + H B + b. A is bias-free; the bias lives with B.
class JointNetwork {
 public:
  JointNetwork() = default;
  JointNetwork(const ModelConfig& config, ParamStore& params, Rng& rng);

  // Uses rows 0..C.rows()-1 of h_pre.
  Value forward(const ParamStore& params, const Value& C, const Value& h_pre) const;

 private:
  Linear acoustic_;
  Linear label_;
};

// Log-probabilities with the blank column forced to kLogSentinel and the
// remaining entries renormalised.
Value log_softmax_without_blank(const Value& logits);

}  // namespace lst::nn

#endif  // LST_NN_NETWORKS_HPP_
