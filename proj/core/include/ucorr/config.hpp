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
#include <string_view>

#include "ucorr/augment.hpp"
#include "ucorr/dataset.hpp"
#include "ucorr/losses.hpp"
#include "ucorr/model.hpp"

namespace ucorr {

struct TrainConfig {
  int epochs = 15;
  int batch_size = 4;
  float learning_rate = 5e-3f;
  float lr_decay = 0.9f;  // applied once per epoch
  float momentum = 0.9f;
  float weight_decay = 0.01f;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  // Start the depth head at the training set's mean depth.
  bool depth_bias_init = true;
  std::uint64_t seed = 0;
  int checkpoint_every = 1;  // epochs between checkpoints; 0 keeps only the final one
  std::int64_t max_steps = 0;  // 0: no cap
  int max_samples = 0;         // 0: whole split
  bool augment = true;
  // Synchronous data preparation. Results are identical either way; the
  // flag only disables the prefetch thread.
  bool deterministic = false;
  ModelConfig model;
  LossConfig loss;
  AugmentationConfig augmentation;

  void validate() const;
};

struct EvalConfig {
  double threshold = 0.5;
  int wd_dilation = 0;
  bool macro = false;
  std::string split = "test";
};

struct RunConfig {
  TrainConfig train;
  DatasetConfig data;
  EvalConfig eval;

  RunConfig();
};

/// Plain-text "key = value" lines; '#' starts a comment. Keys not
/// mentioned keep their current value, unknown keys are rejected.
RunConfig parse_config(std::string_view text, RunConfig base = {}, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its effective value; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& cfg);

/// Named presets: "desk" (CI scale) and "full" (full-resolution recipe).
RunConfig preset_config(std::string_view name);

}  // namespace ucorr
