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

#include "ucorr/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace ucorr {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
std::string format_value(const T& v) {
  char buf[64];
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, Variant>) {
    return std::string(variant_name(v));
  } else if constexpr (std::is_same_v<T, OptimizerKind>) {
    return std::string(optimizer_name(v));
  } else if constexpr (std::is_same_v<T, float>) {
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
  } else if constexpr (std::is_same_v<T, double>) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  } else {
    return std::to_string(v);
  }
}

template <typename T>
void parse_value(const std::string& text, T& out, const std::string& key) {
  auto fail = [&] { throw std::invalid_argument("bad value '" + text + "' for key " + key); };
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
      out = true;
    } else if (text == "false" || text == "0" || text == "no" || text == "off") {
      out = false;
    } else {
      fail();
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = text;
  } else if constexpr (std::is_same_v<T, Variant>) {
    out = parse_variant(text);
  } else if constexpr (std::is_same_v<T, OptimizerKind>) {
    out = parse_optimizer(text);
  } else if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno != 0) fail();
    out = static_cast<T>(v);
  } else if constexpr (std::is_unsigned_v<T>) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || errno != 0 || text.front() == '-') fail();
    out = static_cast<T>(v);
  } else {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || errno != 0) fail();
    out = static_cast<T>(v);
  }
}

// Calls f(key, field) for every configurable field, in dump order.
template <typename F>
void visit_fields(RunConfig& c, F&& f) {
  auto& t = c.train;
  f("train.seed", t.seed);
  f("train.epochs", t.epochs);
  f("train.batch_size", t.batch_size);
  f("train.learning_rate", t.learning_rate);
  f("train.lr_decay", t.lr_decay);
  f("train.momentum", t.momentum);
  f("train.weight_decay", t.weight_decay);
  f("train.optimizer", t.optimizer);
  f("train.depth_bias_init", t.depth_bias_init);
  f("train.checkpoint_every", t.checkpoint_every);
  f("train.max_steps", t.max_steps);
  f("train.max_samples", t.max_samples);
  f("train.augment", t.augment);
  f("train.deterministic", t.deterministic);

  auto& m = t.model;
  f("model.variant", m.variant);
  f("model.base_channels", m.base_channels);
  f("model.encoder_depth", m.encoder_depth);
  f("model.input_height", m.input_height);
  f("model.input_width", m.input_width);
  f("model.depth_scale", m.depth_scale);
  f("model.max_displacement", m.corr.max_displacement);
  f("model.patch_radius", m.corr.patch_radius);
  f("model.corr_stride", m.corr.stride);
  f("model.corr_normalize", m.corr.normalize);

  auto& l = t.loss;
  f("loss.positive_weight", l.positive_weight);
  f("loss.lambda", l.lambda);
  f("loss.msssim_scales", l.msssim_scales);
  f("loss.msssim_window", l.msssim_window);
  f("loss.msssim_sigma", l.msssim_sigma);
  f("loss.depth_range", l.depth_range);

  auto& a = t.augmentation;
  f("augment.motion_blur", a.motion_blur.enabled);
  f("augment.motion_blur.probability", a.motion_blur.probability);
  f("augment.motion_blur.max_length", a.motion_blur.max_length);
  f("augment.flip", a.flip.enabled);
  f("augment.flip.probability", a.flip.probability);
  f("augment.rgb_shift", a.rgb_shift.enabled);
  f("augment.rgb_shift.probability", a.rgb_shift.probability);
  f("augment.rgb_shift.max_shift", a.rgb_shift.max_shift);
  f("augment.color_jitter", a.color_jitter.enabled);
  f("augment.color_jitter.probability", a.color_jitter.probability);
  f("augment.color_jitter.brightness", a.color_jitter.brightness);
  f("augment.color_jitter.contrast", a.color_jitter.contrast);
  f("augment.color_jitter.saturation", a.color_jitter.saturation);
  f("augment.color_jitter.hue", a.color_jitter.hue);
  f("augment.hue_saturation", a.hue_saturation.enabled);
  f("augment.hue_saturation.probability", a.hue_saturation.probability);
  f("augment.hue_saturation.max_hue_shift", a.hue_saturation.max_hue_shift);
  f("augment.hue_saturation.max_saturation", a.hue_saturation.max_saturation);
  f("augment.invert", a.invert.enabled);
  f("augment.invert.probability", a.invert.probability);
  f("augment.clahe", a.clahe.enabled);
  f("augment.clahe.probability", a.clahe.probability);
  f("augment.clahe.tiles", a.clahe.tiles);
  f("augment.clahe.clip_limit", a.clahe.clip_limit);
  f("augment.brightness_contrast", a.brightness_contrast.enabled);
  f("augment.brightness_contrast.probability", a.brightness_contrast.probability);
  f("augment.brightness_contrast.brightness", a.brightness_contrast.brightness);
  f("augment.brightness_contrast.contrast", a.brightness_contrast.contrast);
  f("augment.gamma", a.gamma.enabled);
  f("augment.gamma.probability", a.gamma.probability);
  f("augment.gamma.min", a.gamma.min_gamma);
  f("augment.gamma.max", a.gamma.max_gamma);

  auto& d = c.data;
  f("data.seed", d.seed);
  f("data.train_flights", d.train_flights);
  f("data.val_flights", d.val_flights);
  f("data.test_flights", d.test_flights);
  f("data.frames_per_flight", d.frames_per_flight);
  auto& s = d.scene;
  f("data.height", s.height);
  f("data.width", s.width);
  f("data.focal_factor", s.focal_factor);
  f("data.min_wires", s.min_wires);
  f("data.max_wires", s.max_wires);
  f("data.min_sag", s.min_sag);
  f("data.max_sag", s.max_sag);
  f("data.wire_min_depth", s.wire_min_depth);
  f("data.wire_max_depth", s.wire_max_depth);
  f("data.stroke_min", s.stroke_min);
  f("data.stroke_max", s.stroke_max);
  f("data.min_layers", s.min_layers);
  f("data.max_layers", s.max_layers);
  f("data.layer_min_depth", s.layer_min_depth);
  f("data.layer_max_depth", s.layer_max_depth);
  f("data.haze_distance", s.haze_distance);
  f("data.baseline", s.baseline);
  f("data.rotation_jitter", s.rotation_jitter);
  f("data.far_plane", s.far_plane);

  auto& e = c.eval;
  f("eval.threshold", e.threshold);
  f("eval.wd_dilation", e.wd_dilation);
  f("eval.macro", e.macro);
  f("eval.split", e.split);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train.epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0f)) throw std::invalid_argument("train.learning_rate must be positive");
  if (!(lr_decay > 0.0f)) throw std::invalid_argument("train.lr_decay must be positive");
  if (momentum < 0.0f || weight_decay < 0.0f) {
    throw std::invalid_argument("momentum and weight decay must be non-negative");
  }
  if (checkpoint_every < 0 || max_steps < 0 || max_samples < 0) {
    throw std::invalid_argument("checkpoint_every, max_steps and max_samples must be non-negative");
  }
  model.validate();
  loss.validate();
  augmentation.validate();
  if (std::min(model.input_height, model.input_width) < loss.min_image_size()) {
    throw std::invalid_argument("input size " + std::to_string(model.input_height) + "x" +
                                std::to_string(model.input_width) + " is below the MS-SSIM minimum of " +
                                std::to_string(loss.min_image_size()));
  }
}

RunConfig::RunConfig() {
  train.model.corr.max_displacement = 4;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  bool found = false;
  visit_fields(cfg, [&](const char* name, auto& field) {
    if (key == name) {
      parse_value(value, field, key);
      found = true;
    }
  });
  if (!found) throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(base, trim(std::string_view(body).substr(0, eq)),
                       trim(std::string_view(body).substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base), path.string());
}

std::string dump_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  visit_fields(copy, [&](const char* name, auto& field) {
    out += name;
    out += " = ";
    out += format_value(field);
    out += '\n';
  });
  return out;
}

RunConfig preset_config(std::string_view name) {
  RunConfig cfg;
  if (name == "desk") {
    cfg.train.epochs = 3;
    // Plain SGD tends to collapse to a constant output on tiny models.
    cfg.train.optimizer = OptimizerKind::kAdam;
    cfg.train.model.base_channels = 8;
    cfg.train.model.corr.max_displacement = 4;
    return cfg;
  }
  if (name == "full") {
    cfg.train.epochs = 15;
    cfg.train.model.base_channels = 16;
    cfg.train.model.corr.max_displacement = 10;
    // 480 x 853 rounded down to a multiple of 8 for the four-level encoder.
    cfg.train.model.input_height = 480;
    cfg.train.model.input_width = 848;
    cfg.data.scene.height = 480;
    cfg.data.scene.width = 848;
    cfg.data.train_flights = 300;
    cfg.data.val_flights = 40;
    cfg.data.test_flights = 40;
    return cfg;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace ucorr
