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


#include "lst/autodiff/value.hpp"

#include <unordered_set>
#include <utility>

#include "lst/common.hpp"

namespace lst::ad {

namespace {
thread_local bool g_no_grad = false;
}  // namespace

Matrix& Node::ensure_grad() {
  if (grad.empty() && !data.empty()) grad = Matrix(data.rows(), data.cols());
  return grad;
}

Value::Value(Matrix data, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

double Value::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ContractError("Value::item: expected 1x1, got " + data().shape_string());
  }
  return node_->data(0, 0);
}

Value make_result(Matrix data, const char* op, std::vector<Value> parents,
                  std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->data = std::move(data);
  node->op = op;
  bool needs = false;
  if (!g_no_grad) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Value(std::move(node));
}

void backward(const Value& loss) {
  if (!loss.valid() || loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " +
                        (loss.valid() ? loss.data().shape_string() : std::string("null")));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; reversed it is a topological order.
  std::vector<Node*> order;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are per-sweep scratch; only leaves accumulate across calls.
  for (Node* n : order) {
    if (n->backward) n->grad = Matrix(n->data.rows(), n->data.cols());
  }
  Node& root = *loss.node();
  root.ensure_grad()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = **it;
    if (n.backward && !n.grad.empty()) n.backward(n);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() { return g_no_grad; }

}  // namespace lst::ad
