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
#include <filesystem>
#include <string>
#include <vector>

#include "ucorr/optim.hpp"
#include "ucorr/tensor.hpp"

namespace ucorr {

// On-disk layout (little-endian):
//   "UCKP" | version u32 | params | velocities | second moments |
//   epoch u32 | step u64 | lr f32 | optimizer steps u64
// where each tensor list is
//   count u32 | count x (name_len u32 | name | rank u32 | extents u32[rank] | f32[numel])

inline constexpr char kCheckpointMagic[4] = {'U', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 2;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::vector<TensorRecord> parameters;
  std::vector<TensorRecord> velocities;
  std::vector<TensorRecord> second_moments;  // empty unless trained with Adam
  std::uint32_t epoch = 0;
  std::uint64_t step = 0;
  float learning_rate = 0.0f;
  std::uint64_t optimizer_steps = 0;
};

Checkpoint capture_checkpoint(const ParameterList<float>& params, const OptimizerState& state,
                              std::uint32_t epoch, std::uint64_t step);

/// Copies parameter values (and optimizer buffers, when `state` is non-null) back
/// by name. Throws on missing names or shape mismatches.
void restore_checkpoint(const Checkpoint& ckpt, ParameterList<float>& params, OptimizerState* state);

std::vector<char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& source = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ucorr
