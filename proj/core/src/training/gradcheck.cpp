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


#include "lst/training/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lst/autodiff/ops.hpp"
#include "lst/common.hpp"
#include "lst/rng.hpp"

namespace lst::train {

namespace {

using Pick = std::pair<std::string, std::size_t>;

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

// Entries feeding column d-1 of the encoder output, which becomes alpha.
std::vector<Pick> alpha_channel_entries(const ad::ParamStore& params, std::size_t d) {
  std::vector<Pick> out;
  for (const auto& [path, v] : params.entries()) {
    if (!starts_with(path, "encoder.") || !v.has_grad() || v.cols() != d) continue;
    const bool projection = path == "encoder.input.w" || path == "encoder.input.b" ||
                            path.find(".ffn.2.") != std::string::npos ||
                            path.find(".attn.o.") != std::string::npos;
    if (!projection) continue;
    for (std::size_t r = 0; r < v.rows(); ++r) out.emplace_back(path, r * d + (d - 1));
  }
  return out;
}

std::vector<Pick> group_entries(const ad::ParamStore& params, const char* prefix) {
  std::vector<Pick> out;
  for (const auto& [path, v] : params.entries()) {
    if (!starts_with(path, prefix) || !v.has_grad()) continue;
    for (std::size_t i = 0; i < v.data().size(); ++i) out.emplace_back(path, i);
  }
  return out;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / scale;
}

GradCheckReport check_lst_loss_gradients(nn::LsTransducer& model, const Utterance& utt,
                                         const TrainConfig& config, int per_group,
                                         std::uint64_t seed, double step) {
  if (per_group < 1) throw ContractError("gradcheck: per_group must be >= 1");
  if (!(step > 0.0)) throw ContractError("gradcheck: step must be > 0");
  ad::ParamStore& params = model.params();
  params.zero_grad();
  const ad::Value loss = lst_loss(model, utt, config).total;
  ad::backward(loss);
  const double resolution =
      std::numeric_limits<double>::epsilon() * std::max(std::fabs(loss.item()), 1.0) / step;

  const auto d = static_cast<std::size_t>(model.config().enc_dim);
  std::vector<std::vector<Pick>> groups;
  groups.push_back(group_entries(params, "encoder."));
  groups.push_back(alpha_channel_entries(params, d));
  groups.push_back(group_entries(params, "aif."));
  groups.push_back(group_entries(params, "pred."));
  groups.push_back(group_entries(params, "joint."));

  Rng rng = make_stream(seed, "gradcheck");
  std::vector<Pick> picks;
  for (auto& group : groups) {
    if (group.empty()) throw ContractError("gradcheck: a parameter group received no gradient");
    std::shuffle(group.begin(), group.end(), rng);
    const auto n = std::min(group.size(), static_cast<std::size_t>(per_group));
    picks.insert(picks.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n));
  }

  GradCheckReport report;
  ad::NoGradGuard no_grad;
  for (const auto& [path, index] : picks) {
    ad::Value& p = params.get(path);
    GradCheckEntry e;
    e.path = path;
    e.index = index;
    e.analytic = p.grad()[index];
    double& w = p.mutable_data()[index];
    const double original = w;
    w = original + step;
    const double plus = lst_loss(model, utt, config).total.item();
    w = original - step;
    const double minus = lst_loss(model, utt, config).total.item();
    w = original;
    e.numeric = (plus - minus) / (2.0 * step);
    e.resolution = resolution;
    e.rel_error = relative_error(e.analytic, e.numeric, std::max(1e-8, resolution / kResolvableRelError));
    e.strict_rel_error = relative_error(e.analytic, e.numeric);
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.max_strict_rel_error = std::max(report.max_strict_rel_error, e.strict_rel_error);
    report.entries.push_back(std::move(e));
  }
  params.zero_grad();
  return report;
}

}  // namespace lst::train
