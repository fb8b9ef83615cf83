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


#ifndef LST_NN_MODEL_CONFIG_HPP_
#define LST_NN_MODEL_CONFIG_HPP_

#include "lst/config.hpp"

namespace lst::nn {

// Reserved vocabulary ids. Normal tokens are kFirstNormal .. size-1.
struct Vocabulary {
  static constexpr int kBlank = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSosEos = 2;
  static constexpr int kFirstNormal = 3;

  int size = 20;

  int num_normal() const { return size - kFirstNormal; }
  bool is_normal(int id) const { return id >= kFirstNormal && id < size; }
  bool contains(int id) const { return id >= 0 && id < size; }
};

struct ModelConfig {
  int vocab_size = 20;
  int feat_dim = 16;
  int enc_dim = 32;       // d; last two columns are the alpha / phone channels
  int enc_layers = 2;
  int enc_ffn = 64;
  int pred_dim = 32;      // also the AIF query dimension
  int pred_layers = 4;
  int pred_tap = 2;       // queries are taken after this many layers
  int pred_ffn = 64;
  int max_label_len = 64; // positional table size of the prediction network
  bool aif_scale_qk = true;
  bool tie_classifiers = false;
  double init_alpha_bias = -1.0;

  Vocabulary vocab() const { return Vocabulary{vocab_size}; }
  int content_dim() const { return enc_dim - 2; }

  void bind(ConfigBinder& binder);
  // Throws ContractError on inconsistent settings.
  void validate() const;
};

}  // namespace lst::nn

#endif  // LST_NN_MODEL_CONFIG_HPP_
