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

#include "ucorr/image.hpp"
#include "ucorr/synth.hpp"

namespace ucorr {

/// Each transform fires with its probability when enabled. Parameters are
/// drawn once per call and shared by every frame of the sample.
struct AugmentationConfig {
  struct MotionBlur {
    bool enabled = true;
    double probability = 0.2;
    int max_length = 5;  // kernel length in pixels, >= 3
  } motion_blur;
  struct Flip {
    bool enabled = true;
    double probability = 0.5;
  } flip;
  struct RgbShift {
    bool enabled = true;
    double probability = 0.3;
    double max_shift = 0.08;
  } rgb_shift;
  struct ColorJitter {
    bool enabled = true;
    double probability = 0.3;
    double brightness = 0.2;
    double contrast = 0.2;
    double saturation = 0.2;
    double hue = 0.05;
  } color_jitter;
  struct HueSaturation {
    bool enabled = true;
    double probability = 0.3;
    double max_hue_shift = 0.05;  // fraction of a full turn
    double max_saturation = 0.3;  // relative scale change
  } hue_saturation;
  struct Invert {
    bool enabled = true;
    double probability = 0.05;
  } invert;
  struct Clahe {
    bool enabled = true;
    double probability = 0.1;
    int tiles = 8;
    double clip_limit = 2.0;
  } clahe;
  struct BrightnessContrast {
    bool enabled = true;
    double probability = 0.3;
    double brightness = 0.2;
    double contrast = 0.2;
  } brightness_contrast;
  struct Gamma {
    bool enabled = true;
    double probability = 0.3;
    double min_gamma = 0.8;
    double max_gamma = 1.25;
  } gamma;

  static AugmentationConfig none();
  void validate() const;
};

Sample augment(const Sample& sample, const AugmentationConfig& cfg, std::uint64_t seed);

// Individual transforms, exposed for tests.
Image invert_colors(const Image& img);
Image adjust_gamma(const Image& img, double gamma);
Image equalize_adaptive(const Image& img, int tiles, double clip_limit);
Image shift_hue_saturation(const Image& img, double hue_shift, double saturation_scale);
Image motion_blur(const Image& img, int length, int direction);

}  // namespace ucorr
