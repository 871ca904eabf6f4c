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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace ucorr::testing {

Tensor64 random_tensor64(const Shape& shape, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(shape.numel()));
  for (auto& x : v) x = dist(gen);
  return Tensor64::from_data(shape, std::move(v));
}

Tensor random_tensor(const Shape& shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(static_cast<std::size_t>(shape.numel()));
  for (auto& x : v) x = dist(gen);
  return Tensor::from_data(shape, std::move(v));
}

std::vector<double> direct_conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
                                  int padding) {
  const auto n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const auto o = weight.dim(0), k = weight.dim(2);
  const auto oh = (h + 2 * padding - k) / stride + 1;
  const auto ow = (w + 2 * padding - k) / stride + 1;
  std::vector<double> out;
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t oc = 0; oc < o; ++oc) {
      for (std::int64_t y = 0; y < oh; ++y) {
        for (std::int64_t x = 0; x < ow; ++x) {
          double acc = bias.data()[static_cast<std::size_t>(oc)];
          for (std::int64_t ic = 0; ic < c; ++ic) {
            for (std::int64_t ky = 0; ky < k; ++ky) {
              for (std::int64_t kx = 0; kx < k; ++kx) {
                const auto iy = y * stride + ky - padding;
                const auto ix = x * stride + kx - padding;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += static_cast<double>(input.at(b, ic, iy, ix)) * weight.at(oc, ic, ky, kx);
              }
            }
          }
          out.push_back(acc);
        }
      }
    }
  }
  return out;
}

std::vector<double> window_max_pool(const Tensor& input) {
  std::vector<double> out;
  for (std::int64_t b = 0; b < input.dim(0); ++b) {
    for (std::int64_t c = 0; c < input.dim(1); ++c) {
      for (std::int64_t y = 0; y < input.dim(2); y += 2) {
        for (std::int64_t x = 0; x < input.dim(3); x += 2) {
          out.push_back(std::max({input.at(b, c, y, x), input.at(b, c, y, x + 1), input.at(b, c, y + 1, x),
                                  input.at(b, c, y + 1, x + 1)}));
        }
      }
    }
  }
  return out;
}

std::vector<double> direct_correlation(const Tensor& f1, const Tensor& f2, const CorrConfig& cfg) {
  const auto n = f1.dim(0), c = f1.dim(1), h = f1.dim(2), w = f1.dim(3);
  const int d = cfg.max_displacement, k = cfg.patch_radius, s = cfg.stride;
  const double norm = cfg.normalize ? static_cast<double>((2 * k + 1) * (2 * k + 1) * c) : 1.0;
  auto read = [&](const Tensor& t, std::int64_t b, std::int64_t ch, std::int64_t y, std::int64_t x) {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return static_cast<double>(t.at(b, ch, y, x));
  };
  std::vector<double> out;
  for (std::int64_t b = 0; b < n; ++b) {
    for (int dy = -(d / s) * s; dy <= d; dy += s) {
      for (int dx = -(d / s) * s; dx <= d; dx += s) {
        for (std::int64_t y = 0; y < h; ++y) {
          for (std::int64_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int oy = -k; oy <= k; ++oy) {
              for (int ox = -k; ox <= k; ++ox) {
                for (std::int64_t ch = 0; ch < c; ++ch) {
                  acc += read(f1, b, ch, y + oy, x + ox) * read(f2, b, ch, y + dy + oy, x + dx + ox);
                }
              }
            }
            out.push_back(acc / norm);
          }
        }
      }
    }
  }
  return out;
}

std::vector<CorrCase> random_corr_cases(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  std::vector<CorrCase> cases;
  for (int i = 0; i < count; ++i) {
    CorrCase c;
    c.cfg.max_displacement = pick(0, 3);
    c.cfg.patch_radius = pick(0, 1);
    c.cfg.stride = pick(1, 2);
    c.cfg.normalize = pick(0, 1) == 1;
    const int max_extent = i % 5 == 4 ? 3 : 16;
    c.shape = Shape{pick(1, 2), pick(1, 8), pick(1, max_extent), pick(1, max_extent)};
    c.seed = gen();
    cases.push_back(c);
  }
  return cases;
}

namespace {

struct SweepPoint {
  double tp = 0, fp = 0;
};

// Cumulative (tp, fp) when predicting positive for score >= t, for every
// distinct t in descending order, starting from (0, 0).
std::vector<SweepPoint> sweep(std::span<const float> scores, std::span<const float> labels) {
  std::set<float, std::greater<>> thresholds(scores.begin(), scores.end());
  std::vector<SweepPoint> points{{}};
  for (float t : thresholds) {
    SweepPoint p;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] > 0.5f ? p.tp : p.fp) += 1;
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace

double sweep_auc(std::span<const float> scores, std::span<const float> labels) {
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1.0f));
  const double neg = static_cast<double>(labels.size()) - pos;
  const auto pts = sweep(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = (pts[i].fp - pts[i - 1].fp) / neg;
    area += dx * 0.5 * (pts[i].tp + pts[i - 1].tp) / pos;
  }
  return area;
}

double sweep_ap(std::span<const float> scores, std::span<const float> labels) {
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1.0f));
  const auto pts = sweep(scores, labels);
  double ap = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double recall_step = (pts[i].tp - pts[i - 1].tp) / pos;
    if (recall_step > 0) ap += recall_step * pts[i].tp / (pts[i].tp + pts[i].fp);
  }
  return ap;
}

double direct_wire_loss(std::span<const float> logits, std::span<const float> target, double w) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[i])));
    const double y = target[i];
    total += -(w * y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return total / static_cast<double>(logits.size());
}

double direct_mae(std::span<const float> pred, std::span<const float> target) {
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(static_cast<double>(pred[i]) - target[i]);
  return total / static_cast<double>(pred.size());
}

double masked_abs_rel(std::span<const float> pred, std::span<const float> gt, std::span<const float> mask) {
  double total = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] != 1.0f) continue;
    total += std::abs(static_cast<double>(pred[i]) - gt[i]) / gt[i];
    ++count;
  }
  return total / count;
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("ucorr_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace ucorr::testing
