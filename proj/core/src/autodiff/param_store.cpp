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


#include "lst/autodiff/param_store.hpp"

#include <bit>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lst/common.hpp"

namespace lst::ad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

Value& ParamStore::add(const std::string& path, Matrix init) {
  auto [it, inserted] = params_.emplace(path, Value::parameter(std::move(init)));
  if (!inserted) throw ContractError("ParamStore: duplicate parameter path '" + path + "'");
  return it->second;
}

Value& ParamStore::get(const std::string& path) {
  auto it = params_.find(path);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + path + "'");
  return it->second;
}

const Value& ParamStore::get(const std::string& path) const {
  auto it = params_.find(path);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + path + "'");
  return it->second;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [_, v] : params_) n += v.data().size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, v] : params_) v.zero_grad();
}

std::size_t ParamStore::copy_from(const ParamStore& other, const std::string& prefix) {
  std::size_t copied = 0;
  for (auto& [path, v] : params_) {
    if (path.compare(0, prefix.size(), prefix) != 0) continue;
    auto it = other.params_.find(path);
    if (it == other.params_.end()) continue;
    if (!it->second.data().same_shape(v.data())) {
      throw DimensionError("ParamStore::copy_from: '" + path + "' has shape " +
                           it->second.data().shape_string() + ", expected " +
                           v.data().shape_string());
    }
    v.mutable_data() = it->second.data();
    ++copied;
  }
  return copied;
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& [path, v] : params_) out.add(path, v.data());
  return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> blob) : blob_(blob) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(blob_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  void bytes(void* dst, std::size_t n) {
    need(n);
    if (n) std::memcpy(dst, blob_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == blob_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > blob_.size()) throw DataError("checkpoint: truncated payload");
  }
  std::span<const std::uint8_t> blob_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ParamStore& store) {
  std::vector<std::uint8_t> out = {'L', 'S', 'T', 'K'};
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [path, v] : store.entries()) {
    put_u32(out, static_cast<std::uint32_t>(path.size()));
    out.insert(out.end(), path.begin(), path.end());
    put_u32(out, static_cast<std::uint32_t>(v.rows()));
    put_u32(out, static_cast<std::uint32_t>(v.cols()));
    const auto* raw = reinterpret_cast<const std::uint8_t*>(v.data().data());
    out.insert(out.end(), raw, raw + v.data().size() * sizeof(double));
  }
  return out;
}

void deserialize_checkpoint(std::span<const std::uint8_t> blob, ParamStore& store) {
  Reader in(blob);
  char magic[4];
  in.bytes(magic, 4);
  if (std::memcmp(magic, "LSTK", 4) != 0) throw DataError("checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  if (count != store.size()) {
    throw DataError("checkpoint: holds " + std::to_string(count) + " entries, model has " +
                    std::to_string(store.size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string path(in.u32(), '\0');
    in.bytes(path.data(), path.size());
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (!store.contains(path)) throw DataError("checkpoint: unknown parameter '" + path + "'");
    Value& v = store.get(path);
    if (v.rows() != rows || v.cols() != cols) {
      throw DataError("checkpoint: '" + path + "' is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", model expects " + v.data().shape_string());
    }
    in.bytes(v.mutable_data().data(), static_cast<std::size_t>(rows) * cols * sizeof(double));
  }
  if (!in.done()) throw DataError("checkpoint: trailing bytes");
}

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
  const auto blob = serialize_checkpoint(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("checkpoint: write failed for '" + path.string() + "'");
}

void load_checkpoint(const std::filesystem::path& path, ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  deserialize_checkpoint(blob, store);
}

Adam::Adam(AdamConfig config, Filter filter)
    : config_(config), filter_(std::move(filter)) {}

double Adam::current_lr() const {
  if (config_.warmup_steps > 0 && step_ < config_.warmup_steps) {
    return config_.lr * static_cast<double>(step_ + 1) / config_.warmup_steps;
  }
  if (config_.decay_steps > config_.warmup_steps) {
    const double span = static_cast<double>(config_.decay_steps - config_.warmup_steps);
    const double done = std::min(1.0, static_cast<double>(step_ - config_.warmup_steps) / span);
    return config_.lr * (1.0 - done * (1.0 - config_.final_lr_ratio));
  }
  return config_.lr;
}

double Adam::step(ParamStore& store, double grad_scale) {
  double sq = 0.0;
  for (const auto& [path, v] : store.entries()) {
    if (!v.has_grad() || (filter_ && !filter_(path))) continue;
    for (double g : v.grad().values()) sq += g * g;
  }
  const double norm = std::sqrt(sq) * std::fabs(grad_scale);
  double clip = 1.0;
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) clip = config_.clip_norm / norm;

  const double lr = current_lr();
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (auto& [path, v] : store.entries()) {
    if (!v.has_grad() || (filter_ && !filter_(path))) continue;
    auto& st = state_[path];
    if (st.m.empty()) {
      st.m = Matrix(v.rows(), v.cols());
      st.v = Matrix(v.rows(), v.cols());
    }
    Matrix& w = v.mutable_data();
    const Matrix& g = v.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] * grad_scale * clip;
      st.m[i] = config_.beta1 * st.m[i] + (1.0 - config_.beta1) * gi;
      st.v[i] = config_.beta2 * st.v[i] + (1.0 - config_.beta2) * gi * gi;
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
  return norm;
}

}  // namespace lst::ad
