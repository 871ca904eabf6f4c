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

#include "ucorr/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "ucorr/ops.hpp"
#include "ucorr/rng.hpp"

namespace ucorr {
namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariantNames{{
    {Variant::kUcorrDeep, "ucorr_deep"},
    {Variant::kUcorrShallow, "ucorr_shallow"},
    {Variant::kUcorrPixel, "ucorr_pixel"},
    {Variant::kUnet1f, "unet_1f"},
    {Variant::kUnet2f, "unet_2f"},
    {Variant::kUnet3f, "unet_3f"},
    {Variant::kUcorrNoskip, "ucorr_noskip"},
}};

constexpr int kRgb = 3;
// Roughly centers and scales [0, 1] pixel values.
constexpr double kInputMean = 0.5;
constexpr double kInputStd = 0.25;

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  throw std::invalid_argument("unknown variant");
}

Variant parse_variant(std::string_view name) {
  for (const auto& [variant, n] : kVariantNames) {
    if (n == name) return variant;
  }
  throw std::invalid_argument("unknown model variant '" + std::string(name) + "'");
}

int ModelConfig::frame_count() const {
  switch (variant) {
    case Variant::kUnet1f: return 1;
    case Variant::kUnet3f: return 3;
    default: return 2;
  }
}

bool ModelConfig::uses_correlation() const { return correlation_level() >= 0; }

int ModelConfig::correlation_level() const {
  switch (variant) {
    case Variant::kUcorrPixel: return 0;
    case Variant::kUcorrShallow: return 1;
    case Variant::kUcorrDeep:
    case Variant::kUcorrNoskip: return 2;
    default: return -1;
  }
}

void ModelConfig::validate() const {
  if (base_channels < 1) throw std::invalid_argument("base_channels must be positive");
  if (encoder_depth < 1) throw std::invalid_argument("encoder_depth must be positive");
  if (correlation_level() >= encoder_depth) {
    throw std::invalid_argument("variant " + std::string(variant_name(variant)) +
                                " needs encoder_depth > " + std::to_string(correlation_level()));
  }
  if (depth_scale <= 0.0f) throw std::invalid_argument("depth_scale must be positive");
  corr.validate();
  const int factor = 1 << (encoder_depth - 1);
  if (input_height <= 0 || input_width <= 0 || input_height % factor != 0 ||
      input_width % factor != 0) {
    throw std::invalid_argument("input size " + std::to_string(input_height) + "x" +
                                std::to_string(input_width) + " must be divisible by " +
                                std::to_string(factor));
  }
}

std::vector<ModelConfig> make_variant_suite(const ModelConfig& base) {
  std::vector<ModelConfig> suite;
  for (const auto& [variant, name] : kVariantNames) {
    ModelConfig cfg = base;
    cfg.variant = variant;
    suite.push_back(cfg);
  }
  return suite;
}

template <typename T>
BasicModel<T>::BasicModel(const ModelConfig& cfg, std::uint64_t seed, bool tie_encoders)
    : cfg_(cfg), tied_(tie_encoders) {
  cfg_.validate();
  const int depth = cfg_.encoder_depth;
  const int corr_level = cfg_.correlation_level();
  std::uint64_t layer = 0;
  auto next_seed = [&] { return derive_seed(seed, {layer++}); };

  if (corr_level >= 0) {
    for (int l = 0; l < corr_level; ++l) {
      const int in = l == 0 ? kRgb : level_channels(l - 1);
      encoder_.push_back(make_block("enc" + std::to_string(l), in, level_channels(l), next_seed()));
    }
    if (!tied_) {
      // Same seeds as the shared encoder, so both start from identical weights.
      std::uint64_t mirror = 0;
      for (int l = 0; l < corr_level; ++l) {
        const int in = l == 0 ? kRgb : level_channels(l - 1);
        prev_encoder_.push_back(make_block("prev_enc" + std::to_string(l), in, level_channels(l),
                                           derive_seed(seed, {mirror++})));
      }
    }
    trunk_start_ = corr_level;
  }

  trunk_.resize(static_cast<std::size_t>(depth));
  for (int l = trunk_start_; l < depth; ++l) {
    int in = 0;
    if (l == trunk_start_) {
      if (corr_level >= 0) {
        in = (l == 0 ? kRgb : level_channels(l - 1)) + cfg_.corr.output_channels();
      } else {
        in = kRgb * cfg_.frame_count();
      }
    } else {
      in = level_channels(l - 1);
    }
    trunk_[static_cast<std::size_t>(l)] =
        make_block("trunk" + std::to_string(l), in, level_channels(l), next_seed());
  }

  decoder_.resize(static_cast<std::size_t>(std::max(depth - 1, 0)));
  for (int l = depth - 2; l >= 0; --l) {
    const int in = level_channels(l + 1) + (cfg_.skip_connections() ? level_channels(l) : 0);
    decoder_[static_cast<std::size_t>(l)] =
        make_block("dec" + std::to_string(l), in, level_channels(l), next_seed());
  }
  wire_head_ = make_conv("head_wire", level_channels(0), 1, 1, next_seed());
  depth_head_ = make_conv("head_depth", level_channels(0), 1, 1, next_seed());
}

template <typename T>
int BasicModel<T>::level_channels(int level) const {
  return cfg_.base_channels << level;
}

template <typename T>
typename BasicModel<T>::Conv BasicModel<T>::make_conv(const std::string& name, int in, int out,
                                                      int kernel, std::uint64_t seed) {
  // Kaiming-uniform over fan-in, zero bias.
  const int fan_in = in * kernel * kernel;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Rng rng(seed);
  std::vector<T> w(static_cast<std::size_t>(out) * static_cast<std::size_t>(fan_in));
  for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
  Conv conv{params_.size(), params_.size() + 1, kernel / 2};
  params_.push_back({name + ".weight", BasicTensor<T>::from_data(Shape{out, in, kernel, kernel},
                                                                 std::move(w), true)});
  params_.push_back({name + ".bias", BasicTensor<T>::zeros(Shape{out}, true)});
  return conv;
}

template <typename T>
typename BasicModel<T>::Block BasicModel<T>::make_block(const std::string& name, int in, int out,
                                                        std::uint64_t seed) {
  Conv first = make_conv(name + ".conv_a", in, out, 3, derive_seed(seed, {0}));
  Conv second = make_conv(name + ".conv_b", out, out, 3, derive_seed(seed, {1}));
  return {first, second};
}

template <typename T>
BasicTensor<T> BasicModel<T>::apply(const Conv& conv, const BasicTensor<T>& x) const {
  return conv2d(x, params_[conv.weight].tensor, params_[conv.bias].tensor, 1, conv.padding);
}

template <typename T>
BasicTensor<T> BasicModel<T>::apply(const Block& block, const BasicTensor<T>& x) const {
  return relu(apply(block.second, relu(apply(block.first, x))));
}

template <typename T>
BasicModelOutput<T> BasicModel<T>::forward(std::span<const BasicTensor<T>> frames) const {
  if (static_cast<int>(frames.size()) != cfg_.frame_count()) {
    throw std::invalid_argument(std::string(variant_name(cfg_.variant)) + " takes " +
                                std::to_string(cfg_.frame_count()) + " frame(s), got " +
                                std::to_string(frames.size()));
  }
  const Shape& s = frames.front().shape();
  if (s.rank() != 4 || s[1] != kRgb) {
    throw ShapeError("frames must be N x 3 x H x W, got " + s.str());
  }
  for (const auto& f : frames) {
    if (f.shape() != s) throw ShapeError("frame shapes differ: " + s.str() + " vs " + f.shape().str());
  }
  const int depth = cfg_.encoder_depth;
  const std::int64_t factor = std::int64_t{1} << (depth - 1);
  if (s[2] % factor != 0 || s[3] % factor != 0) {
    throw ShapeError("frame extents " + s.str() + " must be divisible by " + std::to_string(factor));
  }

  std::vector<BasicTensor<T>> inputs;
  for (const auto& f : frames) {
    inputs.push_back(scale(add_scalar(f, static_cast<T>(-kInputMean)), static_cast<T>(1.0 / kInputStd)));
  }
  std::vector<BasicTensor<T>> skips(static_cast<std::size_t>(std::max(depth - 1, 0)));
  BasicTensor<T> x;
  const int corr_level = cfg_.correlation_level();
  if (corr_level >= 0) {
    BasicTensor<T> prev = inputs[0];
    BasicTensor<T> cur = inputs[1];
    for (int l = 0; l < corr_level; ++l) {
      const auto li = static_cast<std::size_t>(l);
      cur = apply(encoder_[li], cur);
      skips[li] = cur;
      cur = max_pool2d(cur);
      prev = max_pool2d(apply(tied_ ? encoder_[li] : prev_encoder_[li], prev));
    }
    x = concat_channels(cur, correlate(cur, prev, cfg_.corr));
  } else {
    x = inputs[0];
    for (std::size_t i = 1; i < inputs.size(); ++i) x = concat_channels(x, inputs[i]);
  }

  for (int l = trunk_start_; l < depth; ++l) {
    const auto li = static_cast<std::size_t>(l);
    x = apply(trunk_[li], x);
    if (l < depth - 1) {
      skips[li] = x;
      x = max_pool2d(x);
    }
  }
  for (int l = depth - 2; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    x = upsample_nearest2(x);
    if (cfg_.skip_connections()) x = concat_channels(x, skips[li]);
    x = apply(decoder_[li], x);
  }
  BasicModelOutput<T> out;
  out.wire_logits = apply(wire_head_, x);
  out.depth = scale(softplus(apply(depth_head_, x)), static_cast<T>(cfg_.depth_scale));
  return out;
}

template <typename T>
std::int64_t BasicModel<T>::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

template <typename T>
const BasicTensor<T>& BasicModel<T>::parameter(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

template <typename T>
int BasicModel<T>::correlation_input_channels() const {
  const int level = cfg_.correlation_level();
  if (level < 0) return 0;
  return level == 0 ? kRgb : level_channels(level - 1);
}

template <typename T>
void BasicModel<T>::set_depth_bias(double meters) {
  if (!(meters > 0.0)) throw std::invalid_argument("depth bias target must be positive");
  // Inverse of softplus.
  const double x = meters / static_cast<double>(cfg_.depth_scale);
  const double b = x > 30.0 ? x : std::log(std::expm1(x));
  params_[depth_head_.bias].tensor.mutable_data()[0] = static_cast<T>(b);
}

template class BasicModel<float>;
template class BasicModel<double>;

}  // namespace ucorr
