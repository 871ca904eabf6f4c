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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucorr/correlation.hpp"
#include "ucorr/optim.hpp"
#include "ucorr/tensor.hpp"

namespace ucorr {

enum class Variant {
  kUcorrDeep,
  kUcorrShallow,
  kUcorrPixel,
  kUnet1f,
  kUnet2f,
  kUnet3f,
  kUcorrNoskip,
};

std::string_view variant_name(Variant v);
/// Accepts the CLI spellings: ucorr_deep, ucorr_shallow, ucorr_pixel,
/// unet_1f, unet_2f, unet_3f, ucorr_noskip.
Variant parse_variant(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::kUcorrDeep;
  int base_channels = 16;
  // Resolution levels, full resolution included. Input extents must be
  // divisible by 2^(encoder_depth - 1).
  int encoder_depth = 4;
  CorrConfig corr{};
  int input_height = 64;
  int input_width = 64;
  // depth = depth_scale * softplus(head), in meters.
  float depth_scale = 10.0f;

  int frame_count() const;
  bool uses_correlation() const;
  /// Level whose input is correlated: 0 raw pixels, 1 after one block,
  /// 2 after the full shared encoder. -1 for the UNet variants.
  int correlation_level() const;
  bool skip_connections() const { return variant != Variant::kUcorrNoskip; }
  void validate() const;
};

/// The seven ablation configurations, all sharing `base`'s widths, depth,
/// correlation settings and input size.
std::vector<ModelConfig> make_variant_suite(const ModelConfig& base = {});

template <typename T>
struct BasicModelOutput {
  BasicTensor<T> wire_logits;  // N x 1 x H x W, pre-sigmoid
  BasicTensor<T> depth;        // N x 1 x H x W, meters, >= 0
};

/// UNet-style encoder/decoder with an optional temporal correlation stage.
///
/// Level l (0 = full resolution) runs two 3x3 conv+ReLU layers with
/// base_channels * 2^l outputs. For the correlating variants, levels below
/// correlation_level() form a twin encoder that processes the previous and
/// current frame with one shared parameter set; the current-frame features
/// are then concatenated with the cost volume and the trunk continues to
/// the bottleneck. Skip connections always come from the current-frame
/// path. The UNet variants stack their frames along the channel axis.
/// Frames in [0, 1] are standardized to (x - 0.5) / 0.25 on entry.
template <typename T>
class BasicModel {
 public:
  /// `tie_encoders = false` gives the previous-frame encoder its own
  /// parameters (initialized identically); used to verify weight tying.
  BasicModel(const ModelConfig& cfg, std::uint64_t seed, bool tie_encoders = true);

  const ModelConfig& config() const { return cfg_; }
  bool encoders_tied() const { return tied_; }

  /// Frames in chronological order; the last one is the current frame.
  BasicModelOutput<T> forward(std::span<const BasicTensor<T>> frames) const;

  ParameterList<T>& parameters() { return params_; }
  const ParameterList<T>& parameters() const { return params_; }
  std::int64_t parameter_count() const;
  const BasicTensor<T>& parameter(std::string_view name) const;

  /// Channels fed to the correlation layer, 0 when there is none.
  int correlation_input_channels() const;

  /// Sets the depth head bias so a zero feature map predicts `meters`.
  void set_depth_bias(double meters);

  template <typename U>
  BasicModel<U> converted() const {
    BasicModel<U> out(cfg_, 0, tied_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto src = params_[i].tensor.data();
      auto dst = out.parameters()[i].tensor.mutable_data();
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] = static_cast<U>(src[j]);
    }
    return out;
  }

 private:
  struct Conv {
    std::size_t weight, bias;  // indices into params_
    int padding;
  };
  struct Block {
    Conv first, second;
  };

  Conv make_conv(const std::string& name, int in, int out, int kernel, std::uint64_t seed);
  Block make_block(const std::string& name, int in, int out, std::uint64_t seed);
  BasicTensor<T> apply(const Conv& conv, const BasicTensor<T>& x) const;
  BasicTensor<T> apply(const Block& block, const BasicTensor<T>& x) const;
  int level_channels(int level) const;

  ModelConfig cfg_;
  bool tied_;
  ParameterList<T> params_;
  std::vector<Block> encoder_;       // current (and, when tied, previous) frame
  std::vector<Block> prev_encoder_;  // only when untied
  std::vector<Block> trunk_;         // indexed by level; entries below the start are unused
  std::vector<Block> decoder_;       // indexed by level, 0 .. depth-2
  Conv wire_head_{}, depth_head_{};
  int trunk_start_ = 0;
};

using Model = BasicModel<float>;
using Model64 = BasicModel<double>;
using ModelOutput = BasicModelOutput<float>;

}  // namespace ucorr
