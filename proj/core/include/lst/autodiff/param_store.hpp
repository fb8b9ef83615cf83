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


#ifndef LST_AUTODIFF_PARAM_STORE_HPP_
#define LST_AUTODIFF_PARAM_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lst/autodiff/value.hpp"

namespace lst::ad {

// Named trainable parameters, keyed by dot-separated path. Iteration order is
// lexicographic by path, which fixes the order of every reduction over
// parameters.
class ParamStore {
 public:
  // Registers a new parameter; throws ContractError if the path exists.
  Value& add(const std::string& path, Matrix init);
  Value& get(const std::string& path);
  const Value& get(const std::string& path) const;
  bool contains(const std::string& path) const { return params_.count(path) != 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;

  const std::map<std::string, Value>& entries() const { return params_; }
  std::map<std::string, Value>& entries() { return params_; }

  void zero_grad();
  // Copies data of every parameter whose path starts with `prefix` from
  // `other` (same path). Returns the number of copied entries.
  std::size_t copy_from(const ParamStore& other, const std::string& prefix = "");

  // Deep copy of the data only (fresh nodes, no gradients).
  ParamStore clone() const;

 private:
  std::map<std::string, Value> params_;
};

// Checkpoint: "LSTK", u32 version, u32 count, then per entry u32 path length,
// UTF-8 path, u32 rows, u32 cols, row-major little-endian f64 payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const ParamStore& store);
// Loads into an existing store. Every path in the blob must already exist
// with matching shape, and every store entry must be present.
void deserialize_checkpoint(std::span<const std::uint8_t> blob, ParamStore& store);
void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);
void load_checkpoint(const std::filesystem::path& path, ParamStore& store);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  int warmup_steps = 0;   // linear warmup
  // After warmup the rate falls linearly to lr * final_lr_ratio at step
  // decay_steps and stays there; decay_steps <= warmup_steps keeps it constant.
  int decay_steps = 0;
  double final_lr_ratio = 1.0;
  double clip_norm = 0.0; // global gradient norm clip; 0 disables
};

// Adaptive-moment update over a ParamStore. A predicate restricts which
// parameters are updated; the rest are left bit-identical.
class Adam {
 public:
  using Filter = std::function<bool(const std::string&)>;

  explicit Adam(AdamConfig config, Filter filter = {});

  // Applies one update from the accumulated gradients, scaled by
  // `grad_scale`. Returns the pre-clip global gradient norm.
  double step(ParamStore& store, double grad_scale = 1.0);
  std::int64_t steps() const { return step_; }
  double current_lr() const;

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  AdamConfig config_;
  Filter filter_;
  std::map<std::string, Moments> state_;
  std::int64_t step_ = 0;
};

}  // namespace lst::ad

#endif  // LST_AUTODIFF_PARAM_STORE_HPP_
