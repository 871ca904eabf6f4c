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

#include "ucorr/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucorr {
namespace {

void check_buffers(const ParameterList<float>& params,
                   const std::vector<std::vector<float>>& buffers, const char* what) {
  if (buffers.size() != params.size()) {
    throw std::invalid_argument("optimizer has " + std::to_string(buffers.size()) + " " + what +
                                " buffers for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i].tensor;
    if (buffers[i].size() != static_cast<std::size_t>(p.numel())) {
      throw std::invalid_argument(std::string(what) + " shape mismatch for parameter " + params[i].name);
    }
    if (!p.has_grad()) {
      throw std::invalid_argument("parameter " + params[i].name + " has no gradient");
    }
  }
}

std::vector<std::vector<float>> zero_buffers(const ParameterList<float>& params) {
  std::vector<std::vector<float>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0f);
  return out;
}

}  // namespace

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

OptimizerState::OptimizerState(const ParameterList<float>& params, float lr, float momentum_coeff,
                               float decay, OptimizerKind k)
    : kind(k), momentum(momentum_coeff), weight_decay(decay), learning_rate(lr) {
  velocity = zero_buffers(params);
  if (kind == OptimizerKind::kAdam) second_moment = zero_buffers(params);
}

void sgd_step(ParameterList<float>& params, OptimizerState& state) {
  check_buffers(params, state.velocity, "velocity");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].tensor;
    auto data = p.mutable_data();
    auto grad = p.grad();
    auto& v = state.velocity[i];
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = state.momentum * v[j] + grad[j] + state.weight_decay * data[j];
      data[j] = data[j] - state.learning_rate * v[j];
    }
    p.zero_grad();
  }
  ++state.steps;
}

void adam_step(ParameterList<float>& params, OptimizerState& state) {
  check_buffers(params, state.velocity, "first moment");
  check_buffers(params, state.second_moment, "second moment");
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const auto c1 = static_cast<float>(1.0 - std::pow(static_cast<double>(state.momentum), t));
  const auto c2 = static_cast<float>(1.0 - std::pow(static_cast<double>(state.beta2), t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].tensor;
    auto data = p.mutable_data();
    auto grad = p.grad();
    auto& m = state.velocity[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      const float g = grad[j] + state.weight_decay * data[j];
      m[j] = state.momentum * m[j] + (1.0f - state.momentum) * g;
      v[j] = state.beta2 * v[j] + (1.0f - state.beta2) * g * g;
      data[j] -= state.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.epsilon);
    }
    p.zero_grad();
  }
}

void optimizer_step(ParameterList<float>& params, OptimizerState& state) {
  if (state.kind == OptimizerKind::kAdam) {
    adam_step(params, state);
  } else {
    sgd_step(params, state);
  }
}

void zero_grad(ParameterList<float>& params) {
  for (auto& p : params) p.tensor.zero_grad();
}

float learning_rate_at_epoch(float lr0, float decay, int epoch) {
  float lr = lr0;
  for (int e = 0; e < epoch; ++e) lr *= decay;
  return lr;
}

}  // namespace ucorr
