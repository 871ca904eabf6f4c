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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ucorr/checkpoint.hpp"
#include "ucorr/config.hpp"
#include "ucorr/image.hpp"
#include "ucorr/losses.hpp"
#include "ucorr/metrics.hpp"
#include "ucorr/model.hpp"
#include "ucorr/synth.hpp"

namespace ucorr {

/// HWC image(s) to an N x C x H x W tensor.
Tensor images_to_tensor(std::span<const Image* const> images);
/// Plane `n` of an N x C x H x W tensor as an HWC image.
Image tensor_to_image(const Tensor& t, std::int64_t n);

struct Batch {
  std::vector<Tensor> frames;  // chronological, N x 3 x H x W each
  Tensor wire;                 // N x 1 x H x W
  Tensor depth;                // N x 1 x H x W
};

/// Uses the last `frame_count` frames of every sample.
Batch make_batch(std::span<const Sample* const> samples, int frame_count);

/// Frames each sample must provide for the given model.
int required_context(const ModelConfig& cfg);

struct StepLog {
  std::int64_t step = 0;
  int epoch = 0;
  float lr = 0.0f;
  double total = 0.0, wire = 0.0, mae = 0.0, msssim = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<StepLog> log;  // steps run in this call
  std::int64_t steps = 0;    // global step count at the end
  std::optional<std::filesystem::path> final_checkpoint;
};

struct TrainOptions {
  // Run directory; empty for an in-memory run with no files.
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> resume_from;
  // Also stop once this many global steps are done (0: no limit). Unlike
  // train.max_steps this is not part of the configuration, so a run can be
  // interrupted and resumed without changing its config dump.
  std::int64_t stop_after = 0;
  std::function<void(const StepLog&)> on_step;
};

/// Seeded shuffled mini-batch training over `samples`. Rejects configs whose
/// input size or frame count does not fit the data before any step.
/// The run directory receives config.cfg (full dump of `cfg`),
/// checkpoints/, logs/train.csv and reports/.
TrainResult train_model(const RunConfig& cfg, const std::vector<Sample>& samples, const TrainOptions& opts = {});

std::int64_t steps_per_epoch(const TrainConfig& cfg, std::size_t samples);

/// Wire probability and depth for one sample, H x W x 1 each.
struct Prediction {
  Image wire_prob;
  Image depth;
};

std::vector<Prediction> predict(const Model& model, const std::vector<Sample>& samples, int batch_size = 4);

EvalReport evaluate_predictions(const std::vector<Sample>& samples, const std::vector<Prediction>& preds,
                                const EvalConfig& cfg);

EvalReport evaluate_model(const Model& model, const std::vector<Sample>& samples, const EvalConfig& cfg);

/// Writes <stem>.txt (table) and <stem>.kv next to each other.
void write_report(const std::filesystem::path& dir, const std::string& stem, const EvalReport& report,
                  const std::string& model_name);

struct AblationRow {
  std::string variant;
  std::vector<std::optional<double>> values;  // one per table column
  std::vector<std::optional<double>> deltas;  // percent vs reference
};

struct AblationTable {
  std::string title;
  std::string reference;
  std::vector<std::string> columns;
  std::vector<AblationRow> rows;
};

/// 100 * (value - reference) / reference; empty when either is missing or
/// the reference is zero.
std::optional<double> percent_delta(std::optional<double> value, std::optional<double> reference);

struct AblationResult {
  std::vector<std::pair<std::string, EvalReport>> reports;  // all variants, suite order
  std::array<AblationTable, 3> tables;                     // correlation location, frames, skips
  std::string summary;                                     // metric tables plus the ucorr_deep vs unet_1f line
};

AblationTable make_ablation_table(const std::string& title, const std::string& reference,
                                  const std::vector<std::string>& variants,
                                  const std::vector<std::pair<std::string, EvalReport>>& reports);

std::string format_ablation_table(const AblationTable& table);

/// Trains every variant with the same budget and seed on one shared
/// training set and evaluates each on the same evaluation samples.
AblationResult run_ablation(const RunConfig& cfg, const std::vector<Sample>& train_set,
                            const std::vector<Sample>& eval_set, const std::filesystem::path& out_dir,
                            const std::function<void(const std::string&)>& progress = {});

/// Loads a checkpoint and the config dump of the run that wrote it
/// (run_dir/config.cfg, where the checkpoint lives in run_dir/checkpoints).
Model load_model(const std::filesystem::path& checkpoint, const TrainConfig& cfg);
std::optional<std::filesystem::path> run_config_for(const std::filesystem::path& checkpoint);

struct InferenceOutputs {
  std::filesystem::path wire_png, depth_utf, panel_png;
};

/// Frames chronological, all the same size. Inputs are resized to the
/// model's input size and outputs back to the frames' size.
InferenceOutputs run_inference(const Model& model, const std::vector<Image>& frames,
                               const std::filesystem::path& out_dir, float far_plane = 100.0f);

/// Polyline SVG of the total loss per step from a training CSV log.
std::string loss_curve_svg(const std::vector<StepLog>& log);
std::vector<StepLog> read_train_log(const std::filesystem::path& csv);

}  // namespace ucorr
