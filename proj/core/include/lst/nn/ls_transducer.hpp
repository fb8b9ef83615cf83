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


#ifndef LST_NN_LS_TRANSDUCER_HPP_
#define LST_NN_LS_TRANSDUCER_HPP_

#include <cstdint>
#include <memory>

#include "lst/nn/networks.hpp"

namespace lst::nn {

// Full model: encoder, prediction network, AIF key/value projection, joint
// network and the CTC classifier on the encoder content columns. Owns its
// parameters; copies are explicit via clone().
class LsTransducer {
 public:
  LsTransducer(const ModelConfig& config, std::uint64_t init_seed);
  LsTransducer(const LsTransducer&) = delete;
  LsTransducer& operator=(const LsTransducer&) = delete;
  LsTransducer(LsTransducer&&) = default;
  LsTransducer& operator=(LsTransducer&&) = default;

  std::unique_ptr<LsTransducer> clone() const;

  const ModelConfig& config() const { return config_; }
  Vocabulary vocab() const { return config_.vocab(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  EncoderOutput encode(const Matrix& frames) const { return encoder_.forward(params_, frames); }
  PredNetOutput predict(std::span<const int> tokens) const {
    return prediction_.forward(params_, tokens);
  }
  // FC(E[:, 0:d-2]) used as both keys and values by AIF.
  Value aif_memory(const EncoderOutput& enc) const;
  // Per-frame log-probabilities over the full vocabulary (blank included).
  Value ctc_log_probs(const EncoderOutput& enc) const;
  Value joint(const Value& C, const Value& h_pre) const { return joint_.forward(params_, C, h_pre); }

 private:
  ModelConfig config_;
  ParamStore params_;
  Encoder encoder_;
  PredictionNetwork prediction_;
  JointNetwork joint_;
  Linear aif_fc_;
  Linear ctc_head_;
};

// The prediction network on its own, used as a text-only language model
// (pre-training, external LM for shallow fusion).
class PredictionLm {
 public:
  PredictionLm(const ModelConfig& config, std::uint64_t init_seed);
  PredictionLm(const PredictionLm&) = delete;
  PredictionLm& operator=(const PredictionLm&) = delete;
  PredictionLm(PredictionLm&&) = default;
  PredictionLm& operator=(PredictionLm&&) = default;

  const ModelConfig& config() const { return config_; }
  Vocabulary vocab() const { return config_.vocab(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  PredNetOutput forward(std::span<const int> tokens) const {
    return network_.forward(params_, tokens);
  }

 private:
  ModelConfig config_;
  ParamStore params_;
  PredictionNetwork network_;
};

}  // namespace lst::nn

#endif  // LST_NN_LS_TRANSDUCER_HPP_
