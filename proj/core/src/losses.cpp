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

#include "ucorr/losses.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "graph_builder.hpp"
#include "ucorr/ops.hpp"

namespace ucorr {
namespace {

using detail::grad_of;
using detail::make_result;

constexpr std::array<double, 5> kReferenceWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

template <typename T>
T softplus_stable(T v) {
  return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v)));
}

template <typename T>
T sigmoid_stable(T v) {
  if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <typename T>
BasicTensor<T> gaussian_window(int size, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(size));
  const double r = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(-(i - r) * (i - r) / (2.0 * sigma * sigma));
    total += g[static_cast<std::size_t>(i)];
  }
  std::vector<T> w(static_cast<std::size_t>(size * size));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      w[static_cast<std::size_t>(y * size + x)] =
          static_cast<T>(g[static_cast<std::size_t>(y)] * g[static_cast<std::size_t>(x)] / (total * total));
    }
  }
  return BasicTensor<T>::from_data(Shape{1, 1, size, size}, std::move(w));
}

}  // namespace

std::vector<double> LossConfig::scale_weights() const {
  std::vector<double> w(kReferenceWeights.begin(),
                        kReferenceWeights.begin() + std::min<std::size_t>(
                                                        kReferenceWeights.size(),
                                                        static_cast<std::size_t>(msssim_scales)));
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

int LossConfig::min_image_size() const { return msssim_window << (msssim_scales - 1); }

void LossConfig::validate() const {
  if (!(positive_weight > 0.0f)) throw std::invalid_argument("positive_weight must be > 0");
  if (!(lambda >= 0.0f)) throw std::invalid_argument("lambda must be >= 0");
  if (msssim_scales < 1 || msssim_scales > static_cast<int>(kReferenceWeights.size())) {
    throw std::invalid_argument("msssim_scales must be in [1, 5]");
  }
  if (msssim_window < 1 || msssim_window % 2 == 0) {
    throw std::invalid_argument("msssim_window must be odd");
  }
  if (!(msssim_sigma > 0.0f) || !(depth_range > 0.0f)) {
    throw std::invalid_argument("msssim_sigma and depth_range must be positive");
  }
}

template <typename T>
BasicTensor<T> wire_loss(const BasicTensor<T>& logits, const BasicTensor<T>& target,
                         T positive_weight) {
  if (logits.shape() != target.shape()) {
    throw ShapeError("wire_loss: logits " + logits.shape().str() + " vs target " +
                     target.shape().str());
  }
  for (T y : target.data()) {
    if (y != T(0) && y != T(1)) throw std::invalid_argument("wire_loss: target must be binary");
  }
  const auto n = static_cast<T>(logits.numel());
  T acc = 0;
  for (std::size_t i = 0; i < target.data().size(); ++i) {
    const T z = logits.data()[i];
    const T y = target.data()[i];
    acc += positive_weight * y * softplus_stable(-z) + (T(1) - y) * softplus_stable(z);
  }
  return make_result<T>(Shape{}, std::vector<T>{acc / n}, "wire_loss", {logits, target},
                        [positive_weight, n](TensorNode<T>& self) {
                          auto& zn = *self.inputs[0];
                          auto& yn = *self.inputs[1];
                          if (!zn.requires_grad) return;
                          auto& g = grad_of(zn);
                          const T scale = self.grad[0] / n;
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            const T p = sigmoid_stable(zn.data[i]);
                            const T y = yn.data[i];
                            g[i] += scale * (positive_weight * y * (p - T(1)) + (T(1) - y) * p);
                          }
                        });
}

template <typename T>
BasicTensor<T> depth_mae(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("depth_mae: pred " + pred.shape().str() + " vs target " + target.shape().str());
  }
  const auto n = static_cast<T>(pred.numel());
  T acc = 0;
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    acc += std::abs(pred.data()[i] - target.data()[i]);
  }
  if (branch_trace_active()) {
    for (std::size_t i = 0; i < pred.data().size(); ++i) {
      const T d = pred.data()[i] - target.data()[i];
      record_branch(d > T(0) ? 2 : (d < T(0) ? 0 : 1));
    }
  }
  return make_result<T>(Shape{}, std::vector<T>{acc / n}, "depth_mae", {pred, target},
                        [n](TensorNode<T>& self) {
                          auto& pn = *self.inputs[0];
                          auto& tn = *self.inputs[1];
                          const T g0 = self.grad[0] / n;
                          for (int k = 0; k < 2; ++k) {
                            auto& node = k == 0 ? pn : tn;
                            if (!node.requires_grad) continue;
                            auto& g = grad_of(node);
                            const T sign = k == 0 ? T(1) : T(-1);
                            for (std::size_t i = 0; i < g.size(); ++i) {
                              const T d = pn.data[i] - tn.data[i];
                              if (d > T(0)) g[i] += sign * g0;
                              else if (d < T(0)) g[i] -= sign * g0;
                            }
                          }
                        });
}

template <typename T>
BasicTensor<T> msssim(const BasicTensor<T>& pred, const BasicTensor<T>& target,
                      const LossConfig& cfg) {
  cfg.validate();
  if (pred.shape() != target.shape() || pred.shape().rank() != 4 || pred.dim(1) != 1) {
    throw ShapeError("msssim needs matching N x 1 x H x W maps, got " + pred.shape().str() +
                     " and " + target.shape().str());
  }
  const int min_size = cfg.min_image_size();
  if (pred.dim(2) < min_size || pred.dim(3) < min_size) {
    throw ShapeError("msssim with " + std::to_string(cfg.msssim_scales) + " scales and window " +
                     std::to_string(cfg.msssim_window) + " needs H, W >= " +
                     std::to_string(min_size) + ", got " + pred.shape().str());
  }
  const auto weights = cfg.scale_weights();
  const auto window = gaussian_window<T>(cfg.msssim_window, cfg.msssim_sigma);
  const auto pool = BasicTensor<T>::full(Shape{1, 1, 2, 2}, T(0.25));
  const T c1 = static_cast<T>(cfg.c1);
  const T c2 = static_cast<T>(cfg.c2);
  auto blur = [&](const BasicTensor<T>& v) { return conv2d(v, window, 1, 0); };

  BasicTensor<T> x = pred;
  BasicTensor<T> y = target;
  BasicTensor<T> product;  // per-image running product, N x 1 x 1 x 1
  for (int s = 0; s < cfg.msssim_scales; ++s) {
    if (s > 0) {
      x = conv2d(x, pool, 2, 0);
      y = conv2d(y, pool, 2, 0);
    }
    const auto mu_x = blur(x);
    const auto mu_y = blur(y);
    const auto mu_xx = mul(mu_x, mu_x);
    const auto mu_yy = mul(mu_y, mu_y);
    const auto mu_xy = mul(mu_x, mu_y);
    const auto var_x = sub(blur(mul(x, x)), mu_xx);
    const auto var_y = sub(blur(mul(y, y)), mu_yy);
    const auto cov = sub(blur(mul(x, y)), mu_xy);
    const auto cs_map = div(add_scalar(scale(cov, T(2)), c2), add_scalar(add(var_x, var_y), c2));
    BasicTensor<T> term;
    if (s + 1 < cfg.msssim_scales) {
      term = mean_hw(cs_map);
    } else {
      const auto lum = div(add_scalar(scale(mu_xy, T(2)), c1), add_scalar(add(mu_xx, mu_yy), c1));
      term = mean_hw(mul(lum, cs_map));
    }
    term = pow_scalar(relu(term), static_cast<T>(weights[static_cast<std::size_t>(s)]));
    product = s == 0 ? term : mul(product, term);
  }
  return mean(product);
}

template <typename T>
BasicLossBreakdown<T> total_loss(const BasicModelOutput<T>& out, const BasicTensor<T>& wire_target,
                                 const BasicTensor<T>& depth_target, const LossConfig& cfg) {
  cfg.validate();
  const T inv_range = T(1) / static_cast<T>(cfg.depth_range);
  auto wire = wire_loss(out.wire_logits, wire_target, static_cast<T>(cfg.positive_weight));
  auto mae = depth_mae(out.depth, depth_target);
  auto similarity = msssim(scale(out.depth, inv_range), scale(depth_target, inv_range), cfg);
  auto dissimilarity = add_scalar(scale(similarity, T(-1)), T(1));
  auto total = add(add(wire, mae), scale(dissimilarity, static_cast<T>(cfg.lambda)));

  BasicLossBreakdown<T> b;
  b.total = total.item();
  b.wire = wire.item();
  b.depth_mae = mae.item();
  b.depth_msssim = dissimilarity.item();
  b.total_tensor = std::move(total);
  return b;
}

#define UCORR_INSTANTIATE_LOSSES(T)                                                              \
  template BasicTensor<T> wire_loss(const BasicTensor<T>&, const BasicTensor<T>&, T);            \
  template BasicTensor<T> depth_mae(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> msssim(const BasicTensor<T>&, const BasicTensor<T>&, const LossConfig&); \
  template BasicLossBreakdown<T> total_loss(const BasicModelOutput<T>&, const BasicTensor<T>&,   \
                                            const BasicTensor<T>&, const LossConfig&);

UCORR_INSTANTIATE_LOSSES(float)
UCORR_INSTANTIATE_LOSSES(double)

#undef UCORR_INSTANTIATE_LOSSES

}  // namespace ucorr
