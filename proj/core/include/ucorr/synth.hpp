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
#include <string>
#include <vector>

#include "ucorr/image.hpp"

namespace ucorr {

/// Generator settings. Lengths are meters, angles radians. The world frame
/// has X to the right, Y down and Z forward; all backgrounds and wires are
/// fronto-parallel planes.
struct SceneConfig {
  int height = 64;
  int width = 64;
  // Focal length in pixels is focal_factor * width (about 58 degrees of
  // horizontal field of view at the default). Principal point at the centre.
  double focal_factor = 0.9;

  int min_wires = 1;
  int max_wires = 2;
  double min_sag = 0.2;
  double max_sag = 2.0;
  double wire_min_depth = 4.0;
  double wire_max_depth = 15.0;
  // Wire endpoints as fractions of the view width at the wire's depth.
  double span_begin_min = -1.0;
  double span_begin_max = -0.6;
  double span_end_min = 1.6;
  double span_end_max = 2.0;
  double stroke_min = 1.0;
  double stroke_max = 2.0;

  int min_layers = 2;
  int max_layers = 4;
  double layer_min_depth = 20.0;
  double layer_max_depth = 80.0;
  double haze_distance = 70.0;

  double baseline = 0.5;         // camera translation along +X per frame
  double rotation_jitter = 0.0;  // max |yaw| per frame
  double far_plane = 100.0;

  std::uint64_t seed = 0;

  double focal_px() const { return focal_factor * width; }
  double cx() const { return 0.5 * (width - 1); }
  double cy() const { return 0.5 * (height - 1); }
  void validate() const;
};

struct BackgroundLayer {
  double depth = 0.0;
  // Skyline in normalized image units (Y / Z): horizon + sum of sinusoids.
  double horizon = 0.0;
  std::array<double, 3> amplitude{};
  std::array<double, 3> frequency{};
  std::array<double, 3> phase{};
  std::array<float, 3> color{};
  double texture_scale = 1.0;
  std::uint64_t texture_seed = 0;
};

struct Wire {
  double depth = 0.0;
  double x_begin = 0.0;
  double x_end = 0.0;
  double x_mid = 0.0;
  double y_low = 0.0;       // Y of the lowest point
  double catenary_a = 1.0;  // Y(X) = y_low - a (cosh((X - x_mid) / a) - 1)
  double stroke = 1.0;      // pixels
  std::array<float, 3> color{};

  double y_at(double x) const;
};

struct Scene {
  int height = 0;
  int width = 0;
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  double far_plane = 100.0;
  double haze_distance = 70.0;
  std::array<float, 3> sky_top{};
  std::array<float, 3> sky_horizon{};
  std::uint64_t sky_seed = 0;
  std::vector<BackgroundLayer> layers;  // nearest first
  std::vector<Wire> wires;
};

struct CameraPose {
  double x = 0.0;
  double yaw = 0.0;
};

struct RenderedView {
  Image rgb;        // H x W x 3
  Image wire_mask;  // H x W x 1, values {0, 1}
  Image depth;      // H x W x 1, meters
};

Scene sample_scene(const SceneConfig& cfg, std::uint64_t seed);

/// Throws std::invalid_argument for a degenerate camera.
RenderedView render_view(const Scene& scene, const CameraPose& pose);

/// Coverage (anti-aliased alpha) of a single wire, ignoring occlusion.
Image render_wire_alpha(const Scene& scene, std::size_t wire, const CameraPose& pose);

/// Camera poses of an n-frame flight, centred on X = 0 and moving along +X.
std::vector<CameraPose> flight_poses(const SceneConfig& cfg, std::uint64_t seed, int frames);

struct SampleMeta {
  std::uint64_t scene_seed = 0;
  double baseline = 0.0;
  std::string flight_id;
  int frame_index = 0;  // index of the current frame within its flight
};

/// Frames are chronological; frames.back() is the current frame.
struct Sample {
  std::vector<Image> frames;
  Image wire_mask;
  Image depth;
  SampleMeta meta;

  const Image& frame_curr() const { return frames.back(); }
  const Image& frame_prev() const { return frames[frames.size() - 2]; }
  int height() const { return wire_mask.height; }
  int width() const { return wire_mask.width; }
};

/// Renders a full flight: views[j] is the scene seen from flight_poses()[j].
std::vector<RenderedView> generate_flight(const SceneConfig& cfg, std::uint64_t seed, int frames);

/// Two-frame sample of a fresh scene.
Sample generate_sample(const SceneConfig& cfg, std::uint64_t seed);

/// Samples whose current frame is frame i of the flight, with `context`
/// frames in total (i runs from context - 1 to the last frame).
std::vector<Sample> flight_samples(const std::vector<RenderedView>& views, int context,
                                   const SampleMeta& base);

}  // namespace ucorr
