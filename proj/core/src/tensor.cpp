// Copyright 2026 The ucorr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ucorr/tensor.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

namespace ucorr {

Shape::Shape(std::initializer_list<std::int64_t> extents) : extents_(extents) { validate(); }

Shape::Shape(std::vector<std::int64_t> extents) : extents_(std::move(extents)) { validate(); }

void Shape::validate() const {
  if (extents_.size() > kMaxRank) {
    throw ShapeError("rank " + std::to_string(extents_.size()) + " exceeds maximum of 4");
  }
  for (auto e : extents_) {
    if (e < 0) throw ShapeError("negative extent in shape " + str());
  }
}

std::int64_t Shape::numel() const {
  std::int64_t n = 1;
  for (auto e : extents_) n *= e;
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(extents_[i]);
  }
  return s + "]";
}

namespace {
thread_local bool g_grad_mode = true;

// Reverse-postorder DFS from the root: producers before consumers.
template <typename T>
std::vector<TensorNode<T>*> topological_order(TensorNode<T>* root, bool grad_only) {
  std::vector<TensorNode<T>*> order;
  std::unordered_set<TensorNode<T>*> visited;
  std::vector<std::pair<TensorNode<T>*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      TensorNode<T>* child = node->inputs[next++].get();
      if (grad_only && !child->requires_grad) continue;
      if (visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

bool grad_mode_enabled() { return g_grad_mode; }

namespace {
thread_local BranchTrace* g_branch_trace = nullptr;
}  // namespace

BranchTrace::BranchTrace() : previous_(g_branch_trace) { g_branch_trace = this; }
BranchTrace::~BranchTrace() { g_branch_trace = previous_; }

bool branch_trace_active() { return g_branch_trace != nullptr; }

void record_branch(std::uint64_t decision) {
  if (!g_branch_trace) return;
  auto& h = g_branch_trace->hash_;
  h = (h ^ decision) * 0x100000001b3ULL;
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + loss.shape().str());
  }
  if (!loss.requires_grad()) return;
  auto order = topological_order(loss.node().get(), /*grad_only=*/true);
  for (auto* node : order) {
    if (node->backward) node->grad.assign(node->data.size(), T(0));
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

template <typename T>
std::vector<std::string_view> graph_trace(const BasicTensor<T>& root) {
  auto order = topological_order(root.node().get(), /*grad_only=*/false);
  std::vector<std::string_view> ops;
  ops.reserve(order.size());
  for (auto* node : order) ops.push_back(node->op);
  return ops;
}

template void backward<float>(const Tensor&);
template void backward<double>(const Tensor64&);
template std::vector<std::string_view> graph_trace<float>(const Tensor&);
template std::vector<std::string_view> graph_trace<double>(const Tensor64&);

}  // namespace ucorr
