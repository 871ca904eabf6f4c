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

#include <initializer_list>
#include <string_view>
#include <utility>
#include <vector>

#include "ucorr/tensor.hpp"

namespace ucorr::detail {

// Creates an op output. Inputs and the backward closure are recorded only
// when grad mode is on; the closure is attached only if some input needs
// a gradient.
template <typename T, typename Backward>
BasicTensor<T> make_result(const Shape& shape, std::vector<T> data, std::string_view op,
                           std::initializer_list<BasicTensor<T>> inputs, Backward&& backward) {
  auto out = BasicTensor<T>::from_data(shape, std::move(data));
  auto& node = *out.node();
  node.op = op;
  if (!grad_mode_enabled()) return out;
  bool needs_grad = false;
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    node.inputs.push_back(in.node());
    needs_grad = needs_grad || in.requires_grad();
  }
  if (needs_grad) {
    node.requires_grad = true;
    node.backward = std::forward<Backward>(backward);
  }
  return out;
}

template <typename T>
inline std::vector<T>& grad_of(TensorNode<T>& node) {
  node.ensure_grad();
  return node.grad;
}

}  // namespace ucorr::detail
