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

#include "ucorr/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ucorr/rng.hpp"

namespace ucorr {
namespace {

enum TransformKey : std::uint64_t {
  kFlip = 1,
  kMotionBlur,
  kRgbShift,
  kColorJitter,
  kHueSaturation,
  kBrightnessContrast,
  kGamma,
  kClahe,
  kInvert,
};

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

template <typename F>
Image map_pixels(const Image& img, F&& f) {
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::array<double, 3> rgb{img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)};
      f(rgb);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = clamp01(rgb[c]);
    }
  }
  return out;
}

void rgb_to_hsv(const std::array<double, 3>& rgb, double& h, double& s, double& v) {
  const double mx = std::max({rgb[0], rgb[1], rgb[2]});
  const double mn = std::min({rgb[0], rgb[1], rgb[2]});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
  } else if (mx == rgb[0]) {
    h = (rgb[1] - rgb[2]) / d / 6.0;
  } else if (mx == rgb[1]) {
    h = ((rgb[2] - rgb[0]) / d + 2.0) / 6.0;
  } else {
    h = ((rgb[0] - rgb[1]) / d + 4.0) / 6.0;
  }
  h -= std::floor(h);
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = (h - std::floor(h)) * 6.0;
  const int i = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

double luminance(const std::array<double, 3>& rgb) {
  return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

template <typename F>
void for_frames(Sample& s, F&& f) {
  for (auto& frame : s.frames) frame = f(frame);
}

}  // namespace

AugmentationConfig AugmentationConfig::none() {
  AugmentationConfig cfg;
  cfg.motion_blur.enabled = false;
  cfg.flip.enabled = false;
  cfg.rgb_shift.enabled = false;
  cfg.color_jitter.enabled = false;
  cfg.hue_saturation.enabled = false;
  cfg.invert.enabled = false;
  cfg.clahe.enabled = false;
  cfg.brightness_contrast.enabled = false;
  cfg.gamma.enabled = false;
  return cfg;
}

void AugmentationConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string("augmentation probability out of [0, 1]: ") + name);
    }
  };
  prob(motion_blur.probability, "motion_blur");
  prob(flip.probability, "flip");
  prob(rgb_shift.probability, "rgb_shift");
  prob(color_jitter.probability, "color_jitter");
  prob(hue_saturation.probability, "hue_saturation");
  prob(invert.probability, "invert");
  prob(clahe.probability, "clahe");
  prob(brightness_contrast.probability, "brightness_contrast");
  prob(gamma.probability, "gamma");
  if (motion_blur.max_length < 3) throw std::invalid_argument("motion blur length must be >= 3");
  if (clahe.tiles < 1 || clahe.clip_limit <= 0.0) throw std::invalid_argument("invalid CLAHE settings");
  if (!(gamma.min_gamma > 0.0 && gamma.max_gamma >= gamma.min_gamma)) {
    throw std::invalid_argument("invalid gamma range");
  }
}

Image invert_colors(const Image& img) {
  Image out = img;
  for (auto& v : out.data) v = 1.0f - v;
  return out;
}

Image adjust_gamma(const Image& img, double gamma) {
  Image out = img;
  for (auto& v : out.data) v = clamp01(std::pow(std::max(0.0f, v), gamma));
  return out;
}

Image shift_hue_saturation(const Image& img, double hue_shift, double saturation_scale) {
  return map_pixels(img, [&](std::array<double, 3>& rgb) {
    double h, s, v;
    rgb_to_hsv(rgb, h, s, v);
    rgb = hsv_to_rgb(h + hue_shift, std::clamp(s * saturation_scale, 0.0, 1.0), v);
  });
}

Image motion_blur(const Image& img, int length, int direction) {
  static constexpr int kDirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  const int dy = kDirs[direction & 3][0];
  const int dx = kDirs[direction & 3][1];
  const int r = length / 2;
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int t = -r; t <= r; ++t) {
          const int yy = std::clamp(y + t * dy, 0, img.height - 1);
          const int xx = std::clamp(x + t * dx, 0, img.width - 1);
          acc += img.at(yy, xx, c);
        }
        out.at(y, x, c) = static_cast<float>(acc / (2 * r + 1));
      }
    }
  }
  return out;
}

Image equalize_adaptive(const Image& img, int tiles, double clip_limit) {
  constexpr int kBins = 256;
  const int ty_n = std::max(1, std::min(tiles, img.height));
  const int tx_n = std::max(1, std::min(tiles, img.width));
  std::vector<double> value(img.pixels());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double m = 0.0;
      for (int c = 0; c < img.channels; ++c) m = std::max(m, static_cast<double>(img.at(y, x, c)));
      value[static_cast<std::size_t>(y) * img.width + x] = m;
    }
  }
  auto bin_of = [](double v) { return std::clamp(static_cast<int>(v * kBins), 0, kBins - 1); };
  auto edge = [](int t, int n, int extent) { return t * extent / n; };

  std::vector<std::array<double, kBins>> maps(static_cast<std::size_t>(ty_n) * tx_n);
  for (int ty = 0; ty < ty_n; ++ty) {
    for (int tx = 0; tx < tx_n; ++tx) {
      std::array<double, kBins> hist{};
      const int y0 = edge(ty, ty_n, img.height), y1 = edge(ty + 1, ty_n, img.height);
      const int x0 = edge(tx, tx_n, img.width), x1 = edge(tx + 1, tx_n, img.width);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) hist[bin_of(value[static_cast<std::size_t>(y) * img.width + x])] += 1.0;
      }
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      const double limit = std::max(1.0, clip_limit * count / kBins);
      double excess = 0.0;
      for (auto& h : hist) {
        if (h > limit) {
          excess += h - limit;
          h = limit;
        }
      }
      auto& map = maps[static_cast<std::size_t>(ty) * tx_n + tx];
      double cdf = 0.0;
      for (int b = 0; b < kBins; ++b) {
        cdf += hist[b] + excess / kBins;
        map[b] = count > 0.0 ? cdf / count : 0.0;
      }
    }
  }

  auto centre = [&](int t, int n, int extent) { return 0.5 * (edge(t, n, extent) + edge(t + 1, n, extent)) - 0.5; };
  auto locate = [&](double p, int n, int extent, int& t0, int& t1, double& w) {
    t0 = 0;
    while (t0 + 1 < n && centre(t0 + 1, n, extent) <= p) ++t0;
    t1 = std::min(t0 + 1, n - 1);
    const double c0 = centre(t0, n, extent);
    const double c1 = centre(t1, n, extent);
    w = (t1 == t0) ? 0.0 : std::clamp((p - c0) / (c1 - c0), 0.0, 1.0);
  };

  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    int a0, a1;
    double wy;
    locate(y, ty_n, img.height, a0, a1, wy);
    for (int x = 0; x < img.width; ++x) {
      int b0, b1;
      double wx;
      locate(x, tx_n, img.width, b0, b1, wx);
      const double v = value[static_cast<std::size_t>(y) * img.width + x];
      const int bin = bin_of(v);
      auto m = [&](int ty, int tx) { return maps[static_cast<std::size_t>(ty) * tx_n + tx][bin]; };
      const double top = m(a0, b0) * (1.0 - wx) + m(a0, b1) * wx;
      const double bottom = m(a1, b0) * (1.0 - wx) + m(a1, b1) * wx;
      const double mapped = top * (1.0 - wy) + bottom * wy;
      for (int c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = v > 0.0 ? clamp01(img.at(y, x, c) * mapped / v) : clamp01(mapped);
      }
    }
  }
  return out;
}

Sample augment(const Sample& sample, const AugmentationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Sample out = sample;
  auto draw = [&](TransformKey key, bool enabled, double p) {
    Rng rng(derive_seed(seed, {key}));
    const bool fire = enabled && rng.bernoulli(p);
    return std::pair{fire, rng};
  };

  if (auto [fire, rng] = draw(kFlip, cfg.flip.enabled, cfg.flip.probability); fire) {
    for_frames(out, flip_horizontal);
    out.wire_mask = flip_horizontal(out.wire_mask);
    out.depth = flip_horizontal(out.depth);
  }
  if (auto [fire, rng] = draw(kMotionBlur, cfg.motion_blur.enabled, cfg.motion_blur.probability); fire) {
    const int half = static_cast<int>(rng.uniform_int(1, cfg.motion_blur.max_length / 2));
    const int direction = static_cast<int>(rng.uniform_int(0, 3));
    for_frames(out, [&](const Image& f) { return motion_blur(f, 2 * half + 1, direction); });
  }
  if (auto [fire, rng] = draw(kRgbShift, cfg.rgb_shift.enabled, cfg.rgb_shift.probability); fire) {
    std::array<double, 3> shift{};
    for (auto& s : shift) s = rng.uniform(-cfg.rgb_shift.max_shift, cfg.rgb_shift.max_shift);
    for_frames(out, [&](const Image& f) {
      return map_pixels(f, [&](std::array<double, 3>& rgb) {
        for (int c = 0; c < 3; ++c) rgb[c] += shift[c];
      });
    });
  }
  if (auto [fire, rng] = draw(kColorJitter, cfg.color_jitter.enabled, cfg.color_jitter.probability); fire) {
    const auto& j = cfg.color_jitter;
    const double b = rng.uniform(1.0 - j.brightness, 1.0 + j.brightness);
    const double c = rng.uniform(1.0 - j.contrast, 1.0 + j.contrast);
    const double s = rng.uniform(1.0 - j.saturation, 1.0 + j.saturation);
    const double h = rng.uniform(-j.hue, j.hue);
    for_frames(out, [&](const Image& f) {
      const Image mixed = map_pixels(f, [&](std::array<double, 3>& rgb) {
        for (auto& v : rgb) v = ((v * b) - 0.5) * c + 0.5;
        const double g = luminance(rgb);
        for (auto& v : rgb) v = g + s * (v - g);
      });
      return shift_hue_saturation(mixed, h, 1.0);
    });
  }
  if (auto [fire, rng] = draw(kHueSaturation, cfg.hue_saturation.enabled, cfg.hue_saturation.probability); fire) {
    const double h = rng.uniform(-cfg.hue_saturation.max_hue_shift, cfg.hue_saturation.max_hue_shift);
    const double s = 1.0 + rng.uniform(-cfg.hue_saturation.max_saturation, cfg.hue_saturation.max_saturation);
    for_frames(out, [&](const Image& f) { return shift_hue_saturation(f, h, s); });
  }
  if (auto [fire, rng] = draw(kBrightnessContrast, cfg.brightness_contrast.enabled,
                              cfg.brightness_contrast.probability);
      fire) {
    const double alpha = 1.0 + rng.uniform(-cfg.brightness_contrast.contrast, cfg.brightness_contrast.contrast);
    const double beta = rng.uniform(-cfg.brightness_contrast.brightness, cfg.brightness_contrast.brightness);
    for_frames(out, [&](const Image& f) {
      return map_pixels(f, [&](std::array<double, 3>& rgb) {
        for (auto& v : rgb) v = v * alpha + beta;
      });
    });
  }
  if (auto [fire, rng] = draw(kGamma, cfg.gamma.enabled, cfg.gamma.probability); fire) {
    const double g = std::exp(rng.uniform(std::log(cfg.gamma.min_gamma), std::log(cfg.gamma.max_gamma)));
    for_frames(out, [&](const Image& f) { return adjust_gamma(f, g); });
  }
  if (auto [fire, rng] = draw(kClahe, cfg.clahe.enabled, cfg.clahe.probability); fire) {
    for_frames(out, [&](const Image& f) { return equalize_adaptive(f, cfg.clahe.tiles, cfg.clahe.clip_limit); });
  }
  if (auto [fire, rng] = draw(kInvert, cfg.invert.enabled, cfg.invert.probability); fire) {
    for_frames(out, invert_colors);
  }
  return out;
}

}  // namespace ucorr
