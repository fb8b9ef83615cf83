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


#include "lst/nn/networks.hpp"


#include "lst/common.hpp"

namespace lst::nn {

namespace {

std::string indexed(const char* base, int i) { return std::string(base) + std::to_string(i); }

}  // namespace

Encoder::Encoder(const ModelConfig& config, ParamStore& params, Rng& rng) : config_(config) {
  const auto d = static_cast<std::size_t>(config.enc_dim);
  input_ = Linear::create(params, "encoder.input", 2 * static_cast<std::size_t>(config.feat_dim) + 1,
                          d, true, rng);
  // Start alpha near one fire per four frames.
  params.get("encoder.input.b").mutable_data()(0, d - 1) = config.init_alpha_bias;
  for (int l = 0; l < config.enc_layers; ++l) {
    blocks_.push_back(CausalBlock::create(params, indexed("encoder.layers.", l), d,
                                          static_cast<std::size_t>(config.enc_ffn), rng));
  }
}

EncoderOutput Encoder::forward(const ParamStore& params, const Matrix& frames) const {
  if (frames.rows() == 0) throw ContractError("encoder_forward: empty input");
  if (frames.cols() != static_cast<std::size_t>(config_.feat_dim)) {
    throw DimensionError("encoder_forward: expected " + std::to_string(config_.feat_dim) +
                         " features per frame, got " + std::to_string(frames.cols()));
  }
  const std::size_t T = frames.rows(), F = frames.cols();
  Matrix stacked(T, 2 * F + 1);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      stacked(t, f) = frames(t, f);
      stacked(t, F + f) = t > 0 ? frames(t - 1, f) : 0.0;
    }
    stacked(t, 2 * F) = 0.1 * static_cast<double>(t + 1);
  }
  Value x = input_(params, Value::constant(std::move(stacked)));
  for (const auto& block : blocks_) x = block(params, x);
  return EncoderOutput{x};
}

// Output classifiers start near-uniform.
constexpr double kClassifierInitScale = 0.1;

PredictionNetwork::PredictionNetwork(const ModelConfig& config, ParamStore& params, Rng& rng)
    : config_(config) {
  const auto d = static_cast<std::size_t>(config.pred_dim);
  params.add("pred.embed", glorot(static_cast<std::size_t>(config.vocab_size), d, rng));
  params.add("pred.pos", glorot(static_cast<std::size_t>(config.max_label_len), d, rng));
  for (int l = 0; l < config.pred_layers; ++l) {
    blocks_.push_back(CausalBlock::create(params, indexed("pred.layers.", l), d,
                                          static_cast<std::size_t>(config.pred_ffn), rng));
  }
  final_norm_ = LayerNorm::create(params, "pred.final_ln", d);
  lm_head_ = Linear::create(params, "pred.lm", d, static_cast<std::size_t>(config.vocab_size),
                            true, rng, kClassifierInitScale);
}

PredNetOutput PredictionNetwork::forward(const ParamStore& params,
                                         std::span<const int> tokens) const {
  const Vocabulary vocab = config_.vocab();
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  ids.push_back(Vocabulary::kSosEos);
  for (int t : tokens) {
    if (t == Vocabulary::kBlank) throw ContractError("prediction_network_forward: blank in input");
    if (!vocab.contains(t)) {
      throw ContractError("prediction_network_forward: token " + std::to_string(t) +
                          " outside vocabulary");
    }
    ids.push_back(t);
  }
  if (ids.size() > static_cast<std::size_t>(config_.max_label_len)) {
    throw ContractError("prediction_network_forward: " + std::to_string(ids.size()) +
                        " positions exceed max_label_len " +
                        std::to_string(config_.max_label_len));
  }
  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);

  Value x = ad::add(ad::embedding(params.get("pred.embed"), ids),
                    ad::embedding(params.get("pred.pos"), positions));
  PredNetOutput out;
  if (config_.pred_tap == 0) out.d_inter = x;
  for (int l = 0; l < config_.pred_layers; ++l) {
    x = blocks_[static_cast<std::size_t>(l)](params, x);
    if (l + 1 == config_.pred_tap) out.d_inter = x;
  }
  out.h_pre = final_norm_(params, x);
  out.lm_logits = lm_head_(params, out.h_pre);
  return out;
}

bool PredictionNetwork::is_adaptable(const std::string& path, int freeze_below) {
  static const std::string kLayers = "pred.layers.";
  if (path.rfind("pred.final_ln.", 0) == 0 || path.rfind("pred.lm.", 0) == 0) return true;
  if (path.rfind(kLayers, 0) != 0) return false;
  const int layer = std::stoi(path.substr(kLayers.size()));
  return layer >= freeze_below;
}

JointNetwork::JointNetwork(const ModelConfig& config, ParamStore& params, Rng& rng) {
  const auto v = static_cast<std::size_t>(config.vocab_size);
  acoustic_ = Linear::create(params, "joint.acoustic", static_cast<std::size_t>(config.pred_dim),
                             v, false, rng, kClassifierInitScale);
  if (config.tie_classifiers) {
    label_ = Linear{"pred.lm", true};
  } else {
    label_ = Linear::create(params, "joint.label", static_cast<std::size_t>(config.pred_dim), v,
                            true, rng, kClassifierInitScale);
  }
}

Value JointNetwork::forward(const ParamStore& params, const Value& C, const Value& h_pre) const {
  if (h_pre.rows() < C.rows()) {
    throw ContractError("joint_logits: " + std::to_string(C.rows()) +
                        " label representations but only " + std::to_string(h_pre.rows()) +
                        " prediction-network rows");
  }
  const Value h = h_pre.rows() == C.rows() ? h_pre : ad::slice_rows(h_pre, 0, C.rows());
  return ad::add(acoustic_(params, C), label_(params, h));
}

Value log_softmax_without_blank(const Value& logits) {
  std::vector<unsigned char> mask(logits.data().size(), 0);
  for (std::size_t r = 0; r < logits.rows(); ++r) mask[r * logits.cols() + Vocabulary::kBlank] = 1;
  return ad::log_softmax_rows(ad::masked_fill(logits, mask, kLogSentinel));
}

}  // namespace lst::nn
