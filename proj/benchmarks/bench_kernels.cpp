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

#include <benchmark/benchmark.h>

#include <vector>

#include "ucorr/correlation.hpp"
#include "ucorr/losses.hpp"
#include "ucorr/model.hpp"
#include "ucorr/ops.hpp"
#include "ucorr/optim.hpp"
#include "ucorr/rng.hpp"

using namespace ucorr;

namespace {

Tensor random_tensor(const Shape& shape, std::uint64_t seed, bool requires_grad = false) {
  Rng rng(seed);
  std::vector<float> v(static_cast<std::size_t>(shape.numel()));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor::from_data(shape, std::move(v), requires_grad);
}

// Args: channels, extent, max displacement.
void BM_CorrelateForward(benchmark::State& state) {
  const auto c = state.range(0), hw = state.range(1);
  CorrConfig cfg;
  cfg.max_displacement = static_cast<int>(state.range(2));
  const auto a = random_tensor({1, c, hw, hw}, 1);
  const auto b = random_tensor({1, c, hw, hw}, 2);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(correlate(a, b, cfg));
}
BENCHMARK(BM_CorrelateForward)->Args({8, 64, 4})->Args({32, 16, 4})->Args({16, 32, 10});

void BM_CorrelateOracleForward(benchmark::State& state) {
  const auto c = state.range(0), hw = state.range(1);
  CorrConfig cfg;
  cfg.max_displacement = static_cast<int>(state.range(2));
  const auto a = random_tensor({1, c, hw, hw}, 1);
  const auto b = random_tensor({1, c, hw, hw}, 2);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(correlate_oracle(a, b, cfg));
}
BENCHMARK(BM_CorrelateOracleForward)->Args({8, 64, 4})->Args({32, 16, 4})->Args({16, 32, 10});

void BM_CorrelateBackward(benchmark::State& state) {
  CorrConfig cfg;
  cfg.max_displacement = 4;
  const auto a = random_tensor({1, 8, 64, 64}, 1, true);
  const auto b = random_tensor({1, 8, 64, 64}, 2, true);
  for (auto _ : state) {
    backward(sum(correlate(a, b, cfg)));
  }
}
BENCHMARK(BM_CorrelateBackward);

// Args: in channels, out channels, extent.
void BM_Conv3x3ForwardBackward(benchmark::State& state) {
  const auto ci = state.range(0), co = state.range(1), hw = state.range(2);
  const auto x = random_tensor({4, ci, hw, hw}, 1, true);
  const auto w = random_tensor({co, ci, 3, 3}, 2, true);
  const auto b = random_tensor({co}, 3, true);
  for (auto _ : state) backward(sum(conv2d(x, w, b, 1, 1)));
  state.SetItemsProcessed(state.iterations() * 4 * co * hw * hw * ci * 9);
}
BENCHMARK(BM_Conv3x3ForwardBackward)->Args({16, 16, 64})->Args({64, 128, 8})->Args({3, 16, 64});

void BM_TrainStep(benchmark::State& state) {
  ModelConfig cfg;
  cfg.variant = static_cast<Variant>(state.range(0));
  cfg.base_channels = static_cast<int>(state.range(1));
  cfg.corr.max_displacement = 4;
  Model model(cfg, 7);
  OptimizerState sgd(model.parameters(), 5e-3f, 0.9f, 0.01f);
  std::vector<Tensor> frames;
  for (int f = 0; f < cfg.frame_count(); ++f) frames.push_back(random_tensor({4, 3, 64, 64}, 10 + f));
  auto wire = Tensor::zeros({4, 1, 64, 64});
  wire.mutable_data()[100] = 1.0f;
  auto depth = Tensor::full({4, 1, 64, 64}, 30.0f);
  const LossConfig loss_cfg;
  for (auto _ : state) {
    const auto out = model.forward(frames);
    const auto loss = total_loss(out, wire, depth, loss_cfg);
    backward(loss.total_tensor);
    sgd_step(model.parameters(), sgd);
  }
}
BENCHMARK(BM_TrainStep)
    ->Args({static_cast<int>(Variant::kUcorrDeep), 4})
    ->Args({static_cast<int>(Variant::kUcorrDeep), 16})
    ->Args({static_cast<int>(Variant::kUnet1f), 16})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
