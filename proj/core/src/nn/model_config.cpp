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


#include "lst/nn/model_config.hpp"

#include "lst/common.hpp"

namespace lst::nn {

void ModelConfig::bind(ConfigBinder& binder) {
  binder.bind("vocab_size", vocab_size);
  binder.bind("feat_dim", feat_dim);
  binder.bind("enc_dim", enc_dim);
  binder.bind("enc_layers", enc_layers);
  binder.bind("enc_ffn", enc_ffn);
  binder.bind("pred_dim", pred_dim);
  binder.bind("pred_layers", pred_layers);
  binder.bind("pred_tap", pred_tap);
  binder.bind("pred_ffn", pred_ffn);
  binder.bind("max_label_len", max_label_len);
  binder.bind("aif_scale_qk", aif_scale_qk);
  binder.bind("tie_classifiers", tie_classifiers);
  binder.bind("init_alpha_bias", init_alpha_bias);
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("model config: ") + what);
  };
  require(vocab_size >= 4, "vocab_size must be >= 4");
  require(feat_dim >= 1, "feat_dim must be >= 1");
  require(enc_dim >= 4, "enc_dim must be >= 4");
  require(enc_layers >= 0 && pred_layers >= 1, "layer counts out of range");
  require(pred_tap >= 0 && pred_tap <= pred_layers, "pred_tap must lie in [0, pred_layers]");
  require(enc_ffn >= 1 && pred_ffn >= 1 && pred_dim >= 1, "widths must be positive");
  require(max_label_len >= 2, "max_label_len must be >= 2");
}

}  // namespace lst::nn
