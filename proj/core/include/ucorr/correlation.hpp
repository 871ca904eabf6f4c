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

/// Bounded-displacement patch correlation between two feature maps.
///
/// For displacement (dy, dx) on the stride grid with |dy|, |dx| <= d,
///   out[n, idx(dy,dx), y, x] =
///       sum_{o in [-k,k]^2} < f1[n, :, (y,x)+o], f2[n, :, (y,x)+(dy,dx)+o] >
/// Reads outside the image are zero. Displacement channels run row-major
/// over (dy, dx) from (-d,-d) to (d,d). With `normalize`, each value is
/// divided by (2k+1)^2 * C.
struct CorrConfig {
  int max_displacement = 10;
  int patch_radius = 0;
  int stride = 1;
  bool normalize = true;

  int grid_radius() const { return max_displacement / stride; }
  int grid_size() const { return 2 * grid_radius() + 1; }
  int output_channels() const { return grid_size() * grid_size(); }
  void validate() const;
};

/// Optimized kernel. For each displacement it forms the channel dot
/// product map over the valid overlap (x innermost, contiguous in both
/// operands), then applies a separable (2k+1)^2 box sum.
template <typename T>
BasicTensor<T> correlate(const BasicTensor<T>& f1, const BasicTensor<T>& f2, const CorrConfig& cfg);

/// Literal nested-loop evaluation of the same definition, including its
/// backward pass. Reference for tests and benchmarks.
template <typename T>
BasicTensor<T> correlate_oracle(const BasicTensor<T>& f1, const BasicTensor<T>& f2,
                                const CorrConfig& cfg);

}  // namespace ucorr
