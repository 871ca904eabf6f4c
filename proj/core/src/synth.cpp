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

#include "ucorr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ucorr/rng.hpp"

namespace ucorr {
namespace {

constexpr std::uint64_t kLayerKey = 1;
constexpr std::uint64_t kWireKey = 2;
constexpr std::uint64_t kSkyKey = 3;
constexpr std::uint64_t kPoseKey = 4;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("SceneConfig: ") + what);
}

double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                                             static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise in [0, 1).
double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smooth(x - fx);
  const double ty = smooth(y - fy);
  const double a = lattice(seed, ix, iy);
  const double b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1);
  const double d = lattice(seed, ix + 1, iy + 1);
  return (a + (b - a) * tx) * (1.0 - ty) + (c + (d - c) * tx) * ty;
}

double fractal_noise(std::uint64_t seed, double x, double y) {
  return 0.65 * value_noise(seed, x, y) + 0.35 * value_noise(seed + 1, 2.03 * x, 2.03 * y);
}

double solve_catenary(double half_span, double sag) {
  // a (cosh(h / a) - 1) decreases monotonically in a.
  double lo = std::log(half_span * 1e-3);
  double hi = std::log(half_span * 1e6);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double a = std::exp(mid);
    const double s = a * (std::cosh(half_span / a) - 1.0);
    if (s > sag) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

std::array<float, 3> lerp(const std::array<float, 3>& a, const std::array<float, 3>& b, double t) {
  std::array<float, 3> out{};
  for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(a[c] + (b[c] - a[c]) * t);
  return out;
}

void check_camera(const Scene& scene) {
  if (!(scene.fx > 0.0) || !(scene.fy > 0.0) || scene.height <= 0 || scene.width <= 0) {
    throw std::invalid_argument("degenerate camera: intrinsics must be positive");
  }
}

struct WireCoverage {
  std::vector<float> alpha;
  std::vector<float> depth;
};

WireCoverage rasterize_wire(const Scene& scene, const Wire& wire, const CameraPose& pose) {
  const int h = scene.height;
  const int w = scene.width;
  WireCoverage cov{std::vector<float>(static_cast<std::size_t>(h) * w, 0.0f),
                   std::vector<float>(static_cast<std::size_t>(h) * w, 0.0f)};
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  const double half = 0.5 * wire.stroke;
  const double reach = half + 1.0;

  struct Pt {
    double u, v, z;
  };
  auto project = [&](double x) {
    const double dx = x - pose.x;
    const double dz = wire.depth;
    const double xc = c * dx - s * dz;
    const double zc = s * dx + c * dz;
    return Pt{scene.cx + scene.fx * xc / zc, scene.cy + scene.fy * wire.y_at(x) / zc, zc};
  };

  const double step = 0.25 * wire.depth / scene.fx;
  const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((wire.x_end - wire.x_begin) / step)));
  Pt prev = project(wire.x_begin);
  for (std::int64_t i = 1; i <= n; ++i) {
    const double x = wire.x_begin + (wire.x_end - wire.x_begin) * static_cast<double>(i) / static_cast<double>(n);
    const Pt cur = project(x);
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(prev.u, cur.u) - reach)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(prev.u, cur.u) + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(prev.v, cur.v) - reach)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(prev.v, cur.v) + reach)));
    const double ex = cur.u - prev.u;
    const double ey = cur.v - prev.v;
    const double len2 = ex * ex + ey * ey;
    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        double t = 0.0;
        if (len2 > 0.0) t = std::clamp(((px - prev.u) * ex + (py - prev.v) * ey) / len2, 0.0, 1.0);
        const double qx = prev.u + t * ex - px;
        const double qy = prev.v + t * ey - py;
        const double a = std::clamp(half + 0.5 - std::sqrt(qx * qx + qy * qy), 0.0, 1.0);
        const auto idx = static_cast<std::size_t>(py) * w + px;
        if (a > cov.alpha[idx]) {
          cov.alpha[idx] = static_cast<float>(a);
          cov.depth[idx] = static_cast<float>(prev.z + t * (cur.z - prev.z));
        }
      }
    }
    prev = cur;
  }
  return cov;
}

}  // namespace

void SceneConfig::validate() const {
  require(height > 0 && width > 0, "image size must be positive");
  require(focal_factor > 0.0, "degenerate camera: focal length must be positive");
  require(min_wires >= 0 && max_wires >= min_wires, "wire count range invalid");
  require(min_sag > 0.0 && max_sag >= min_sag, "sag range invalid");
  require(wire_min_depth > 0.0 && wire_max_depth >= wire_min_depth, "wire depth range invalid");
  require(span_begin_max >= span_begin_min && span_end_max >= span_end_min && span_end_min > span_begin_max,
          "wire span range invalid");
  require(stroke_min > 0.0 && stroke_max >= stroke_min, "stroke range invalid");
  require(min_layers >= 0 && max_layers >= min_layers, "layer count range invalid");
  require(layer_min_depth > wire_max_depth, "backgrounds must lie behind the wires");
  require(layer_max_depth >= layer_min_depth && layer_max_depth <= far_plane, "layer depth range invalid");
  require(haze_distance > 0.0, "haze distance must be positive");
  require(std::isfinite(baseline), "baseline must be finite");
  require(rotation_jitter >= 0.0 && rotation_jitter < 0.5, "rotation jitter must be in [0, 0.5)");
}

double Wire::y_at(double x) const {
  return y_low - catenary_a * (std::cosh((x - x_mid) / catenary_a) - 1.0);
}

Scene sample_scene(const SceneConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Scene scene;
  scene.height = cfg.height;
  scene.width = cfg.width;
  scene.fx = scene.fy = cfg.focal_px();
  scene.cx = cfg.cx();
  scene.cy = cfg.cy();
  scene.far_plane = cfg.far_plane;
  scene.haze_distance = cfg.haze_distance;

  Rng sky(derive_seed(seed, {kSkyKey}));
  scene.sky_top = {static_cast<float>(sky.uniform(0.25, 0.4)), static_cast<float>(sky.uniform(0.45, 0.6)),
                   static_cast<float>(sky.uniform(0.75, 0.95))};
  scene.sky_horizon = {static_cast<float>(sky.uniform(0.7, 0.85)), static_cast<float>(sky.uniform(0.78, 0.9)),
                       static_cast<float>(sky.uniform(0.85, 0.97))};
  scene.sky_seed = sky.next_u64();

  Rng lr(derive_seed(seed, {kLayerKey}));
  const auto n_layers = static_cast<int>(lr.uniform_int(cfg.min_layers, cfg.max_layers));
  std::vector<double> depths;
  for (int i = 0; i < n_layers; ++i) depths.push_back(lr.uniform(cfg.layer_min_depth, cfg.layer_max_depth));
  std::sort(depths.begin(), depths.end(), std::greater<>());
  // Farthest first here so that nearer ranges sit lower in the frame.
  double horizon = lr.uniform(-0.2, 0.05);
  for (double z : depths) {
    BackgroundLayer layer;
    layer.depth = z;
    layer.horizon = horizon;
    for (int k = 0; k < 3; ++k) {
      layer.amplitude[k] = lr.uniform(0.005, 0.05) / (k + 1);
      layer.frequency[k] = lr.uniform(1.0, 4.0) * (k + 1);
      layer.phase[k] = lr.uniform(0.0, 2.0 * std::numbers::pi);
    }
    layer.color = {static_cast<float>(lr.uniform(0.15, 0.5)), static_cast<float>(lr.uniform(0.25, 0.55)),
                   static_cast<float>(lr.uniform(0.1, 0.35))};
    layer.texture_scale = lr.uniform(0.15, 0.35);
    layer.texture_seed = lr.next_u64();
    scene.layers.push_back(layer);
    horizon += lr.uniform(0.06, 0.16);
  }
  std::reverse(scene.layers.begin(), scene.layers.end());

  Rng wr(derive_seed(seed, {kWireKey}));
  const auto n_wires = static_cast<int>(wr.uniform_int(cfg.min_wires, cfg.max_wires));
  for (int i = 0; i < n_wires; ++i) {
    Wire wire;
    wire.depth = wr.uniform(cfg.wire_min_depth, cfg.wire_max_depth);
    const double view_w = cfg.width * wire.depth / scene.fx;
    const double view_left = -scene.cx * wire.depth / scene.fx;
    wire.x_begin = view_left + wr.uniform(cfg.span_begin_min, cfg.span_begin_max) * view_w;
    wire.x_end = view_left + wr.uniform(cfg.span_end_min, cfg.span_end_max) * view_w;
    const double span = wire.x_end - wire.x_begin;
    wire.x_mid = wire.x_begin + span * wr.uniform(0.35, 0.65);
    const double v_low = wr.uniform(0.2, 0.8) * cfg.height;
    wire.y_low = (v_low - scene.cy) * wire.depth / scene.fy;
    wire.catenary_a = solve_catenary(0.5 * span, wr.uniform(cfg.min_sag, cfg.max_sag));
    wire.stroke = wr.uniform(cfg.stroke_min, cfg.stroke_max);
    const double g = wr.uniform(0.04, 0.3);
    wire.color = {static_cast<float>(g), static_cast<float>(g * wr.uniform(0.9, 1.1)),
                  static_cast<float>(g * wr.uniform(0.9, 1.1))};
    scene.wires.push_back(wire);
  }
  return scene;
}

RenderedView render_view(const Scene& scene, const CameraPose& pose) {
  check_camera(scene);
  const int h = scene.height;
  const int w = scene.width;
  RenderedView view{Image(h, w, 3), Image(h, w, 1), Image(h, w, 1)};
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double rx = (u - scene.cx) / scene.fx;
      const double ry = (v - scene.cy) / scene.fy;
      const double wx = c * rx + s;
      const double wz = -s * rx + c;
      std::array<float, 3> color{};
      double depth = scene.far_plane;
      bool hit = false;
      for (const auto& layer : scene.layers) {
        const double lambda = layer.depth / wz;
        const double x = pose.x + lambda * wx;
        const double ny = lambda * ry / layer.depth;  // Y / Z
        const double nx = x / layer.depth;
        double top = layer.horizon;
        for (int k = 0; k < 3; ++k) {
          top += layer.amplitude[k] * std::sin(2.0 * std::numbers::pi * layer.frequency[k] * nx + layer.phase[k]);
        }
        if (ny < top) continue;
        const double tex = fractal_noise(layer.texture_seed, nx * scene.fx * layer.texture_scale,
                                         ny * scene.fy * layer.texture_scale);
        const double shade = 0.7 + 0.45 * tex - 0.25 * std::min(1.0, ny - top);
        for (int k = 0; k < 3; ++k) color[k] = static_cast<float>(std::clamp(layer.color[k] * shade, 0.0, 1.0));
        depth = lambda;
        hit = true;
        break;
      }
      if (!hit) {
        const double lambda = scene.far_plane / wz;
        const double nx = (pose.x + lambda * wx) / scene.far_plane;
        const double ny = ry / wz;
        color = lerp(scene.sky_top, scene.sky_horizon, std::clamp((ny + 0.6) / 0.9, 0.0, 1.0));
        const double cloud = fractal_noise(scene.sky_seed, nx * scene.fx * 0.08, ny * scene.fy * 0.15);
        const double t = 0.35 * std::max(0.0, cloud - 0.45);
        for (int k = 0; k < 3; ++k) color[k] = static_cast<float>(color[k] + (1.0 - color[k]) * t);
        depth = lambda;
      }
      const double haze = 1.0 - std::exp(-depth / scene.haze_distance);
      color = lerp(color, scene.sky_horizon, haze);
      for (int k = 0; k < 3; ++k) view.rgb.at(v, u, k) = color[k];
      view.depth.at(v, u) = static_cast<float>(std::min(depth, scene.far_plane));
    }
  }

  std::vector<std::size_t> order(scene.wires.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scene.wires[a].depth > scene.wires[b].depth; });
  for (auto wi : order) {
    const auto& wire = scene.wires[wi];
    const auto cov = rasterize_wire(scene, wire, pose);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const auto idx = static_cast<std::size_t>(v) * w + u;
        const float a = cov.alpha[idx];
        if (a <= 0.0f) continue;
        for (int k = 0; k < 3; ++k) {
          float& px = view.rgb.at(v, u, k);
          px = a * wire.color[k] + (1.0f - a) * px;
        }
        if (a > 0.5f) {
          // Nearer wires are drawn later and win.
          view.wire_mask.at(v, u) = 1.0f;
          view.depth.at(v, u) = cov.depth[idx];
        }
      }
    }
  }
  return view;
}

Image render_wire_alpha(const Scene& scene, std::size_t wire, const CameraPose& pose) {
  check_camera(scene);
  const auto cov = rasterize_wire(scene, scene.wires.at(wire), pose);
  Image out(scene.height, scene.width, 1);
  out.data = cov.alpha;
  return out;
}

std::vector<CameraPose> flight_poses(const SceneConfig& cfg, std::uint64_t seed, int frames) {
  std::vector<CameraPose> poses;
  for (int j = 0; j < frames; ++j) {
    CameraPose pose;
    pose.x = (j - 0.5 * (frames - 1)) * cfg.baseline;
    if (cfg.rotation_jitter > 0.0) {
      Rng r(derive_seed(seed, {kPoseKey, static_cast<std::uint64_t>(j)}));
      pose.yaw = r.uniform(-cfg.rotation_jitter, cfg.rotation_jitter);
    }
    poses.push_back(pose);
  }
  return poses;
}

std::vector<RenderedView> generate_flight(const SceneConfig& cfg, std::uint64_t seed, int frames) {
  if (frames < 1) throw std::invalid_argument("a flight needs at least one frame");
  const Scene scene = sample_scene(cfg, seed);
  std::vector<RenderedView> views;
  for (const auto& pose : flight_poses(cfg, seed, frames)) views.push_back(render_view(scene, pose));
  return views;
}

std::vector<Sample> flight_samples(const std::vector<RenderedView>& views, int context,
                                   const SampleMeta& base) {
  if (context < 2) throw std::invalid_argument("samples need at least two frames");
  std::vector<Sample> out;
  for (int i = context - 1; i < static_cast<int>(views.size()); ++i) {
    Sample s;
    for (int j = i - context + 1; j <= i; ++j) s.frames.push_back(views[static_cast<std::size_t>(j)].rgb);
    s.wire_mask = views[static_cast<std::size_t>(i)].wire_mask;
    s.depth = views[static_cast<std::size_t>(i)].depth;
    s.meta = base;
    s.meta.frame_index = i;
    out.push_back(std::move(s));
  }
  return out;
}

Sample generate_sample(const SceneConfig& cfg, std::uint64_t seed) {
  SampleMeta meta;
  meta.scene_seed = seed;
  meta.baseline = cfg.baseline;
  return flight_samples(generate_flight(cfg, seed, 2), 2, meta).front();
}

}  // namespace ucorr
