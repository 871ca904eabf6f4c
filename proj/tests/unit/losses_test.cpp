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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ucorr/losses.hpp"
#include "ucorr/ops.hpp"

namespace ucorr {
namespace {

using testing::random_tensor;

Tensor binary_mask(const Shape& s, std::uint64_t seed, float rate = 0.2f) {
  auto t = random_tensor(s, seed, 0.0f, 1.0f);
  for (auto& v : t.mutable_data()) v = v < rate ? 1.0f : 0.0f;
  return t;
}

TEST(LossConfigTest, DefaultsAndScaleWeights) {
  LossConfig c;
  EXPECT_EQ(c.positive_weight, 20.0f);
  EXPECT_EQ(c.lambda, 0.8f);
  EXPECT_EQ(c.msssim_scales, 3);
  EXPECT_EQ(c.msssim_window, 11);
  EXPECT_EQ(c.min_image_size(), 44);
  auto w = c.scale_weights();
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  // Reference five-scale exponents, first three kept and renormalized.
  const double ref[3] = {0.0448, 0.2856, 0.3001};
  const double total = ref[0] + ref[1] + ref[2];
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], ref[i] / total, 1e-12);
  c.lambda = -1.0f;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(WireLossTest, PositiveAtHalfProbability) {
  auto logits = Tensor::zeros({1, 1, 1, 1});
  auto target = Tensor::full({1, 1, 1, 1}, 1.0f);
  EXPECT_NEAR(wire_loss(logits, target, 20.0f).item(), 20.0 * std::log(2.0), 1e-5);
  EXPECT_NEAR(wire_loss(logits, target, 20.0f).item(), 13.863, 5e-4);
}

TEST(WireLossTest, PerfectPrediction) {
  auto target = binary_mask({2, 1, 8, 8}, 1);
  auto logits = Tensor::zeros(target.shape());
  for (std::size_t i = 0; i < target.data().size(); ++i) {
    logits.mutable_data()[i] = target.data()[i] > 0.5f ? 30.0f : -30.0f;
  }
  EXPECT_LT(wire_loss(logits, target, 20.0f).item(), 1e-9);
}

TEST(WireLossTest, MatchesDirectSummation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto target = binary_mask({1, 1, 8, 8}, seed + 10);
    auto logits = random_tensor({1, 1, 8, 8}, seed, -5.0f, 5.0f);
    EXPECT_NEAR(wire_loss(logits.cast<double>(), target.cast<double>(), 20.0).item(),
                testing::direct_wire_loss(logits.data(), target.data(), 20.0), 1e-6);
  }
}

TEST(WireLossTest, PermutationInvariant) {
  auto target = binary_mask({1, 1, 8, 8}, 3);
  auto logits = random_tensor({1, 1, 8, 8}, 4, -3.0f, 3.0f);
  std::vector<std::size_t> order(64);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(5));
  std::vector<float> pl(64), pt(64);
  for (std::size_t i = 0; i < 64; ++i) {
    pl[i] = logits.data()[order[i]];
    pt[i] = target.data()[order[i]];
  }
  EXPECT_NEAR(wire_loss(logits, target, 20.0f).item(),
              wire_loss(Tensor::from_data(logits.shape(), pl), Tensor::from_data(target.shape(), pt), 20.0f).item(),
              1e-6);
}

TEST(WireLossTest, RejectsNonBinaryTarget) {
  auto target = Tensor::full({1, 1, 2, 2}, 0.5f);
  EXPECT_THROW(wire_loss(Tensor::zeros({1, 1, 2, 2}), target, 20.0f), std::invalid_argument);
  EXPECT_THROW(wire_loss(Tensor::zeros({1, 1, 2, 2}), Tensor::zeros({1, 1, 2, 3}), 20.0f), ShapeError);
}

TEST(DepthMaeTest, IdentityOffsetAndOracle) {
  auto t = random_tensor({2, 1, 6, 6}, 1, 1.0f, 50.0f);
  EXPECT_EQ(depth_mae(t, t).item(), 0.0f);
  EXPECT_NEAR(depth_mae(add_scalar(t, 2.0f), t).item(), 2.0, 1e-5);
  auto p = random_tensor({2, 1, 6, 6}, 2, 1.0f, 50.0f);
  EXPECT_NEAR(depth_mae(p, t).item(), testing::direct_mae(p.data(), t.data()), 1e-5);
}

TEST(DepthMaeTest, ZeroSubgradientAtEquality) {
  auto t = Tensor::from_data({1, 1, 1, 2}, {3.0f, 4.0f});
  auto p = Tensor::from_data({1, 1, 1, 2}, {3.0f, 5.0f}, true);
  backward(depth_mae(p, t));
  EXPECT_EQ(p.grad()[0], 0.0f);
  EXPECT_EQ(p.grad()[1], 0.5f);
}

TEST(MsssimTest, SelfSimilarity) {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto x = random_tensor({2, 1, 48, 48}, seed, 0.0f, 1.0f);
    EXPECT_NEAR(msssim(x, x, cfg).item(), 1.0, 1e-6);
  }
}

TEST(MsssimTest, Symmetric) {
  LossConfig cfg;
  auto a = random_tensor({1, 1, 48, 48}, 1, 0.0f, 1.0f);
  auto b = add(scale(a, 0.6f), scale(random_tensor({1, 1, 48, 48}, 2, 0.0f, 1.0f), 0.4f));
  EXPECT_NEAR(msssim(a, b, cfg).item(), msssim(b, a, cfg).item(), 1e-6);
}

TEST(MsssimTest, ContrastInversionScoresLow) {
  LossConfig cfg;
  auto x = binary_mask({1, 1, 48, 48}, 7, 0.5f);
  auto inverted = add_scalar(scale(x, -1.0f), 1.0f);
  const double v = msssim(x, inverted, cfg).item();
  EXPECT_LT(v, 0.5);
  EXPECT_GE(v, -1.0);
}

TEST(MsssimTest, RejectsSmallImages) {
  LossConfig cfg;
  try {
    msssim(Tensor::zeros({1, 1, 40, 64}), Tensor::zeros({1, 1, 40, 64}), cfg);
    FAIL() << "expected rejection";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("44"), std::string::npos) << e.what();
  }
}

TEST(MsssimTest, DepthScaleInvariance) {
  // Scaling both depth maps and the normalizing range together leaves the
  // normalized inputs, and therefore the index, unchanged.
  LossConfig cfg;
  auto gt = random_tensor({1, 1, 48, 48}, 3, 5.0f, 90.0f);
  auto pred = add(scale(gt, 0.9f), random_tensor({1, 1, 48, 48}, 4, 0.0f, 8.0f));
  auto value = [&](float k) {
    LossConfig c = cfg;
    c.depth_range = cfg.depth_range * k;
    return msssim(scale(scale(pred, k), 1.0f / c.depth_range), scale(scale(gt, k), 1.0f / c.depth_range), c).item();
  };
  const double base = value(1.0f);
  for (float k : {0.5f, 2.0f, 7.0f}) EXPECT_NEAR(value(k), base, 1e-5) << k;
}

BasicModelOutput<float> output(const Tensor& logits, const Tensor& depth) { return {logits, depth}; }

TEST(TotalLossTest, CompositionIdentity) {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto wire = binary_mask({2, 1, 48, 48}, seed + 1);
    auto depth = random_tensor({2, 1, 48, 48}, seed + 2, 3.0f, 90.0f);
    auto logits = random_tensor({2, 1, 48, 48}, seed + 3, -4.0f, 4.0f);
    auto pred = add(depth, random_tensor({2, 1, 48, 48}, seed + 4, -2.0f, 2.0f));
    auto b = total_loss(output(logits, pred), wire, depth, cfg);
    EXPECT_NEAR(b.total, b.wire + b.depth_mae + 0.8 * b.depth_msssim, 1e-6);
    EXPECT_NEAR(b.total_tensor.item(), b.total, 1e-6);
    EXPECT_NEAR(b.wire, wire_loss(logits, wire, 20.0f).item(), 1e-6);
    EXPECT_NEAR(b.depth_mae, depth_mae(pred, depth).item(), 1e-6);
    const double ms = msssim(scale(pred, 0.01f), scale(depth, 0.01f), cfg).item();
    EXPECT_NEAR(b.depth_msssim, 1.0 - ms, 1e-6);
    EXPECT_GE(b.wire, 0.0);
    EXPECT_GE(b.depth_mae, 0.0);
    EXPECT_GE(b.depth_msssim, 0.0);
  }
}

TEST(TotalLossTest, PerfectPrediction) {
  LossConfig cfg;
  auto wire = binary_mask({1, 1, 48, 48}, 9);
  auto depth = random_tensor({1, 1, 48, 48}, 10, 3.0f, 90.0f);
  auto logits = Tensor::zeros(wire.shape());
  for (std::size_t i = 0; i < wire.data().size(); ++i) logits.mutable_data()[i] = wire.data()[i] > 0.5f ? 30.0f : -30.0f;
  EXPECT_LT(total_loss(output(logits, depth), wire, depth, cfg).total, 1e-6);
}

TEST(TotalLossTest, LambdaZeroDecouples) {
  LossConfig cfg;
  cfg.lambda = 0.0f;
  auto wire = binary_mask({1, 1, 48, 48}, 11);
  auto depth = random_tensor({1, 1, 48, 48}, 12, 3.0f, 90.0f);
  auto logits = random_tensor({1, 1, 48, 48}, 13, -2.0f, 2.0f);
  auto pred = random_tensor({1, 1, 48, 48}, 14, 3.0f, 90.0f);
  auto b = total_loss(output(logits, pred), wire, depth, cfg);
  // Components are float sums widened to double; add them the same way.
  EXPECT_EQ(b.total, static_cast<double>(static_cast<float>(b.wire) + static_cast<float>(b.depth_mae)));
}

}  // namespace
}  // namespace ucorr
