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


#ifndef LST_TRAINING_GRADCHECK_HPP_
#define LST_TRAINING_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lst/training/trainer.hpp"

namespace lst::train {

struct GradCheckEntry {
  std::string path;
  std::size_t index = 0;  // row-major offset within the parameter
  double analytic = 0.0;
  double numeric = 0.0;
  // Smallest gradient difference the central difference can resolve:
  // eps * |loss| / step.
  double resolution = 0.0;
  double rel_error = 0.0;         // floored at resolution / kResolvableRelError
  double strict_rel_error = 0.0;  // floored at 1e-8 only
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double max_strict_rel_error = 0.0;
};

// Relative precision the check is meant to certify. Below gradient magnitude
// resolution / kResolvableRelError a finite difference cannot tell a 1e-4
// discrepancy from rounding of the loss, so the denominator is floored there.
inline constexpr double kResolvableRelError = 1e-4;

// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-8);

// Compares the backward pass of lst_loss with central differences on
// `per_group` random entries from each of: encoder body, alpha channel,
// AIF projection, prediction network and joint network. The model is left
// bit-identical.
GradCheckReport check_lst_loss_gradients(nn::LsTransducer& model, const Utterance& utt,
                                         const TrainConfig& config, int per_group,
                                         std::uint64_t seed, double step = 1e-5);

}  // namespace lst::train

#endif  // LST_TRAINING_GRADCHECK_HPP_
