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


#include "lst/nn/ls_transducer.hpp"

#include "lst/rng.hpp"

namespace lst::nn {

LsTransducer::LsTransducer(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng = make_stream(init_seed, "init");
  encoder_ = Encoder(config_, params_, rng);
  prediction_ = PredictionNetwork(config_, params_, rng);
  joint_ = JointNetwork(config_, params_, rng);
  const auto content = static_cast<std::size_t>(config_.content_dim());
  aif_fc_ = Linear::create(params_, "aif.fc", content, static_cast<std::size_t>(config_.pred_dim),
                           true, rng);
  ctc_head_ = Linear::create(params_, "ctc.head", content,
                             static_cast<std::size_t>(config_.vocab_size), true, rng);
}

std::unique_ptr<LsTransducer> LsTransducer::clone() const {
  auto copy = std::make_unique<LsTransducer>(config_, 0);
  copy->params_.copy_from(params_);
  return copy;
}

Value LsTransducer::aif_memory(const EncoderOutput& enc) const {
  return aif_fc_(params_, enc.content());
}

Value LsTransducer::ctc_log_probs(const EncoderOutput& enc) const {
  return ad::log_softmax_rows(ctc_head_(params_, enc.content()));
}

PredictionLm::PredictionLm(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng = make_stream(init_seed, "init");
  network_ = PredictionNetwork(config_, params_, rng);
}

}  // namespace lst::nn
