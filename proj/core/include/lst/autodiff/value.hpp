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


#ifndef LST_AUTODIFF_VALUE_HPP_
#define LST_AUTODIFF_VALUE_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "lst/autodiff/matrix.hpp"

namespace lst::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the reverse-mode graph. `backward` reads the node's own
// gradient and adds the contribution of every parent into the parent's
// gradient; it never assigns.
struct Node {
  Matrix data;
  Matrix grad;  // empty until first touched
  const char* op = "leaf";
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;

  Matrix& ensure_grad();
};

// Handle onto a graph node. Copies share the node.
class Value {
 public:
  Value() = default;
  explicit Value(Matrix data, bool requires_grad = false);
  explicit Value(NodePtr node) : node_(std::move(node)) {}

  static Value constant(Matrix data) { return Value(std::move(data), false); }
  static Value parameter(Matrix data) { return Value(std::move(data), true); }
  static Value scalar(double v) { return Value(Matrix(1, 1, v), false); }

  bool valid() const { return static_cast<bool>(node_); }
  const Matrix& data() const { return node_->data; }
  // Direct write access, for optimizers and checkpoint loading only.
  Matrix& mutable_data() { return node_->data; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() { node_->grad = Matrix(); }
  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }

  std::size_t rows() const { return node_->data.rows(); }
  std::size_t cols() const { return node_->data.cols(); }
  double item() const;
  double operator()(std::size_t r, std::size_t c) const { return node_->data(r, c); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// Builds a non-leaf node. When no parent requires a gradient (or a
// NoGradGuard is active) the parents and the backward rule are dropped.
Value make_result(Matrix data, const char* op, std::vector<Value> parents,
                  std::function<void(Node&)> backward);

// Accumulates d(loss)/d(p) into every reachable ancestor p. `loss` must be 1x1.
void backward(const Value& loss);

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool active();

 private:
  bool previous_;
};

}  // namespace lst::ad

#endif  // LST_AUTODIFF_VALUE_HPP_
