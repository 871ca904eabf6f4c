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
#include <string>
#include <string_view>
#include <vector>

#include "ucorr/tensor.hpp"

namespace ucorr {

template <typename T>
struct NamedParameter {
  std::string name;
  BasicTensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedParameter<T>>;

enum class OptimizerKind { kSgd, kAdam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

/// Per-parameter optimizer buffers plus the hyperparameters of the step.
///
/// SGD with momentum and L2 weight decay folded into the velocity:
///   v <- momentum * v + grad + weight_decay * param
///   param <- param - lr * v
///
/// Adam with the same L2 term added to the gradient, `momentum` as beta1
/// and bias-corrected moments; `velocity` holds the first moment.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kSgd;
  float momentum = 0.9f;
  float weight_decay = 0.01f;
  float learning_rate = 5e-3f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  std::uint64_t steps = 0;
  std::vector<std::vector<float>> velocity;       // one per registered parameter
  std::vector<std::vector<float>> second_moment;  // Adam only

  OptimizerState() = default;
  OptimizerState(const ParameterList<float>& params, float lr, float momentum, float weight_decay,
                 OptimizerKind kind = OptimizerKind::kSgd);
};

/// Applies one update and zeroes the gradients. Throws if a registered
/// parameter has no gradient or the buffers do not match.
void sgd_step(ParameterList<float>& params, OptimizerState& state);
void adam_step(ParameterList<float>& params, OptimizerState& state);

/// Dispatches on state.kind.
void optimizer_step(ParameterList<float>& params, OptimizerState& state);

void zero_grad(ParameterList<float>& params);

/// lr0 * decay^epoch, evaluated as a float recurrence the way the
/// training loop applies it.
float learning_rate_at_epoch(float lr0, float decay, int epoch);

}  // namespace ucorr
