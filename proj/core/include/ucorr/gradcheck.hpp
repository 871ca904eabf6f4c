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
#include <string>

#include "ucorr/optim.hpp"
#include "ucorr/tensor.hpp"

namespace ucorr {

using ScalarFn64 = std::function<Tensor64(const Tensor64&)>;

/// max over elements of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
/// evaluated in 64-bit. `numeric` is the Richardson extrapolation of the
/// central differences at steps eps and eps / 2.
///
/// Each stencil is evaluated under a BranchTrace. When a probe lands on a
/// different smooth piece than x (a ReLU or pooling decision flipped), the
/// step for that element is halved until it does not, at most ten times.
double gradient_check(const ScalarFn64& f, const Tensor64& x, double eps = 1e-3);

/// 64-bit shadow evaluation of a 32-bit point.
double gradient_check(const ScalarFn64& f, const Tensor& x, double eps = 1e-3);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::int64_t worst_index = -1;
  std::size_t elements_checked = 0;
  std::size_t reduced_steps = 0;  // elements whose stencil had to shrink
};

/// Checks d loss / d param on up to `per_parameter` randomly sampled
/// elements of every parameter (all elements when the tensor is smaller).
/// `loss` must rebuild its graph from the current parameter values.
GradCheckReport check_parameter_gradients(const std::function<Tensor64()>& loss,
                                          ParameterList<double>& params, double eps,
                                          std::size_t per_parameter, std::uint64_t seed);

}  // namespace ucorr
