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


#ifndef LST_TRAINING_METRICS_HPP_
#define LST_TRAINING_METRICS_HPP_

#include <span>
#include <vector>

namespace lst::train {

// Levenshtein distance with unit costs.
int edit_distance(std::span<const int> ref, std::span<const int> hyp);

struct ErrorRate {
  long errors = 0;
  long ref_tokens = 0;
  double rate() const { return ref_tokens ? static_cast<double>(errors) / ref_tokens : 0.0; }
};

// Micro-averaged: total edits over total reference length.
ErrorRate token_error_rate(const std::vector<std::vector<int>>& refs,
                           const std::vector<std::vector<int>>& hyps);

}  // namespace lst::train

#endif  // LST_TRAINING_METRICS_HPP_
