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


#include "lst/training/metrics.hpp"

#include <algorithm>

#include "lst/common.hpp"

namespace lst::train {

int edit_distance(std::span<const int> ref, std::span<const int> hyp) {
  std::vector<int> prev(hyp.size() + 1);
  std::vector<int> cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const int sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

ErrorRate token_error_rate(const std::vector<std::vector<int>>& refs,
                           const std::vector<std::vector<int>>& hyps) {
  if (refs.size() != hyps.size()) {
    throw ContractError("token_error_rate: " + std::to_string(refs.size()) + " references vs " +
                        std::to_string(hyps.size()) + " hypotheses");
  }
  ErrorRate out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out.errors += edit_distance(refs[i], hyps[i]);
    out.ref_tokens += static_cast<long>(refs[i].size());
  }
  return out;
}

}  // namespace lst::train
