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


#include <cmath>

#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"

namespace lst::ctc {

double brute_force_ctc_oracle(const Matrix& probs, OracleMode mode, std::span<const int> sequence,
                              int blank) {
  const std::size_t T = probs.rows(), V = probs.cols();
  if (T == 0 || V == 0) throw ContractError("ctc oracle: empty posterior matrix");
  double paths = 1.0;
  for (std::size_t t = 0; t < T; ++t) paths *= static_cast<double>(V);
  if (paths > 1e7) {
    throw ContractError("ctc oracle: refusing to enumerate " + std::to_string(V) + "^" +
                        std::to_string(T) + " paths");
  }

  std::vector<std::size_t> path(T, 0);
  std::vector<int> collapsed;
  collapsed.reserve(T);
  double total = 0.0;
  while (true) {
    collapsed.clear();
    int prev = -1;
    double p = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
      const int k = static_cast<int>(path[t]);
      p *= probs(t, path[t]);
      if (k != prev && k != blank) collapsed.push_back(k);
      prev = k;
    }
    bool match = false;
    if (mode == OracleMode::kLabel) {
      match = collapsed.size() == sequence.size() &&
              std::equal(sequence.begin(), sequence.end(), collapsed.begin());
    } else {
      match = collapsed.size() >= sequence.size() &&
              std::equal(sequence.begin(), sequence.end(), collapsed.begin());
    }
    if (match) total += p;

    // Odometer increment, last frame fastest.
    std::size_t t = T;
    while (t > 0) {
      --t;
      if (++path[t] < V) break;
      path[t] = 0;
      if (t == 0) return total;
    }
  }
}

}  // namespace lst::ctc
