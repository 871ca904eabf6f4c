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

#include <vector>

#include "ucorr/model.hpp"
#include "ucorr/tensor.hpp"

namespace ucorr {

struct LossConfig {
  float positive_weight = 20.0f;
  float lambda = 0.8f;
  int msssim_scales = 3;
  int msssim_window = 11;
  float msssim_sigma = 1.5f;
  // Depth is divided by this (meters) before MS-SSIM.
  float depth_range = 100.0f;
  float c1 = 0.01f * 0.01f;
  float c2 = 0.03f * 0.03f;

  /// Reference five-scale MS-SSIM exponents truncated to msssim_scales
  /// and renormalized to sum to one.
  std::vector<double> scale_weights() const;
  /// Smallest spatial extent msssim() accepts.
  int min_image_size() const;
  void validate() const;
};

/// Positive-weighted binary cross-entropy from logits, pixel mean:
///   w * y * softplus(-z) + (1 - y) * softplus(z)
/// Targets must be exactly 0 or 1.
template <typename T>
BasicTensor<T> wire_loss(const BasicTensor<T>& logits, const BasicTensor<T>& target,
                         T positive_weight);

/// Mean absolute error. Subgradient 0 where pred == target.
template <typename T>
BasicTensor<T> depth_mae(const BasicTensor<T>& pred, const BasicTensor<T>& target);

/// Multi-scale SSIM of N x 1 x H x W maps already scaled to [0, 1].
/// Gaussian-windowed statistics ("valid" filtering), 2x2 average-pool
/// between scales; contrast-structure terms at every scale but the last,
/// full SSIM at the last. Negative per-scale terms are clamped to zero
/// before the fractional exponent. Returns the batch mean.
template <typename T>
BasicTensor<T> msssim(const BasicTensor<T>& pred, const BasicTensor<T>& target,
                      const LossConfig& cfg);

template <typename T>
struct BasicLossBreakdown {
  BasicTensor<T> total_tensor;
  double total = 0.0;
  double wire = 0.0;
  double depth_mae = 0.0;
  double depth_msssim = 0.0;  // 1 - MS-SSIM
};

/// total = wire + mae + lambda * (1 - msssim(pred / L, target / L)).
template <typename T>
BasicLossBreakdown<T> total_loss(const BasicModelOutput<T>& out, const BasicTensor<T>& wire_target,
                                 const BasicTensor<T>& depth_target, const LossConfig& cfg);

using LossBreakdown = BasicLossBreakdown<float>;

}  // namespace ucorr
