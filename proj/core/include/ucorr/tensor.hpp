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

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ucorr {

/// Extents of a tensor, outermost first. Image tensors use NCHW.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<std::int64_t> extents);
  explicit Shape(std::vector<std::int64_t> extents);

  std::size_t rank() const { return extents_.size(); }
  std::int64_t operator[](std::size_t axis) const { return extents_.at(axis); }
  const std::vector<std::int64_t>& extents() const { return extents_; }
  std::int64_t numel() const;
  std::string str() const;

  bool operator==(const Shape&) const = default;

 private:
  void validate() const;
  std::vector<std::int64_t> extents_;
};

/// Thrown for operand shape/contract violations. The message names the
/// offending shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  // Empty until a backward pass (or the optimizer) allocates it.
  std::vector<T> grad;
  bool requires_grad = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(TensorNode&)> backward;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

/// Handle to a node of the define-by-run graph. Copies share storage,
/// like parameter handles in most training frameworks.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using Node = TensorNode<T>;

  BasicTensor() : node_(std::make_shared<Node>()) { node_->shape = Shape{0}; }

  static BasicTensor zeros(const Shape& shape, bool requires_grad = false) {
    return full(shape, T(0), requires_grad);
  }
  static BasicTensor full(const Shape& shape, T value, bool requires_grad = false) {
    return BasicTensor(shape, std::vector<T>(static_cast<std::size_t>(shape.numel()), value),
                       requires_grad);
  }
  static BasicTensor scalar(T value, bool requires_grad = false) {
    return BasicTensor(Shape{}, std::vector<T>{value}, requires_grad);
  }
  static BasicTensor from_data(const Shape& shape, std::vector<T> data,
                               bool requires_grad = false) {
    return BasicTensor(shape, std::move(data), requires_grad);
  }

  const Shape& shape() const { return node_->shape; }
  std::int64_t numel() const { return node_->shape.numel(); }
  std::int64_t dim(std::size_t axis) const { return node_->shape[axis]; }

  std::span<const T> data() const { return node_->data; }
  // Writable view; intended for leaves (inputs, parameters).
  std::span<T> mutable_data() { return node_->data; }

  bool has_grad() const { return !node_->grad.empty() || node_->data.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }
  void clear_grad() { node_->grad.clear(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  std::string_view op() const { return node_->op; }
  T item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape().str());
    return node_->data[0];
  }
  T at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
    const auto& s = node_->shape;
    return node_->data[static_cast<std::size_t>(((n * s[1] + c) * s[2] + y) * s[3] + x)];
  }

  /// Same values, no graph history, no gradient requirement.
  BasicTensor detach() const { return BasicTensor(shape(), node_->data, false); }

  template <typename U>
  BasicTensor<U> cast(bool requires_grad = false) const {
    std::vector<U> out(node_->data.begin(), node_->data.end());
    return BasicTensor<U>::from_data(shape(), std::move(out), requires_grad);
  }

  bool same_storage(const BasicTensor& other) const { return node_ == other.node_; }
  const std::shared_ptr<Node>& node() const { return node_; }
  static BasicTensor wrap(std::shared_ptr<Node> node) { return BasicTensor(std::move(node)); }

 private:
  explicit BasicTensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  BasicTensor(const Shape& shape, std::vector<T> data, bool requires_grad)
      : node_(std::make_shared<Node>()) {
    if (static_cast<std::int64_t>(data.size()) != shape.numel()) {
      throw ShapeError("data length " + std::to_string(data.size()) +
                       " does not match shape " + shape.str());
    }
    node_->shape = shape;
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
  }

  std::shared_ptr<Node> node_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// While alive on the current thread, ops record neither inputs nor
/// backward closures.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// While alive on the current thread, piecewise-smooth ops (ReLU, max
/// pooling, absolute error, pow at zero) fold the branch each element
/// takes into signature(). Two evaluations with equal signatures ran on
/// the same smooth piece of the function.
class BranchTrace {
 public:
  BranchTrace();
  ~BranchTrace();
  BranchTrace(const BranchTrace&) = delete;
  BranchTrace& operator=(const BranchTrace&) = delete;

  std::uint64_t signature() const { return hash_; }

 private:
  friend void record_branch(std::uint64_t decision);
  BranchTrace* previous_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

bool branch_trace_active();
void record_branch(std::uint64_t decision);

/// Populates grad for every requires_grad tensor reachable from `loss`.
/// Leaf gradients accumulate across calls; interior gradients are reset.
template <typename T>
void backward(const BasicTensor<T>& loss);

/// Op names of the graph that produced `root`, producers first. Each
/// node appears once.
template <typename T>
std::vector<std::string_view> graph_trace(const BasicTensor<T>& root);

}  // namespace ucorr
