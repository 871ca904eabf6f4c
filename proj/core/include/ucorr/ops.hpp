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

#include "ucorr/tensor.hpp"

namespace ucorr {

// Differentiable primitives. Every op validates operand shapes, never
// mutates its inputs, and registers an exact analytic backward rule.

/// Cross-correlation over NCHW input with OIKK weights (square kernels).
/// Output extent per spatial axis is floor((H + 2*padding - K)/stride) + 1.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int stride, int padding);
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight, int stride,
                      int padding);

/// 2x2 window, stride 2. Ties route the gradient to the first element of
/// the window in row-major order.
template <typename T>
BasicTensor<T> max_pool2d(const BasicTensor<T>& input);

/// Each value replicated into a 2x2 block.
template <typename T>
BasicTensor<T> upsample_nearest2(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> softplus(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> div(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor);
template <typename T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T offset);
/// x^p for x >= 0. The derivative at 0 is taken as 0.
template <typename T>
BasicTensor<T> pow_scalar(const BasicTensor<T>& x, T exponent);

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x);
/// Spatial mean of an NCHW tensor; result is N x C x 1 x 1.
template <typename T>
BasicTensor<T> mean_hw(const BasicTensor<T>& x);

}  // namespace ucorr
