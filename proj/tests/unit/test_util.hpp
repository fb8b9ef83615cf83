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


#ifndef LST_TESTS_UNIT_TEST_UTIL_HPP_
#define LST_TESTS_UNIT_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "lst/autodiff/matrix.hpp"
#include "lst/autodiff/value.hpp"

namespace lst::testing {

using ad::Matrix;
using ad::Value;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

inline double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

// Central-difference gradient of a scalar function of one matrix.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                               double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double plus = f(probe);
    probe[i] = x[i] - h;
    const double minus = f(probe);
    probe[i] = x[i];
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_error(a[i], b[i]));
  return worst;
}

}  // namespace lst::testing

#endif  // LST_TESTS_UNIT_TEST_UTIL_HPP_
