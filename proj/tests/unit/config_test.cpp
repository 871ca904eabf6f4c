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
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ucorr/checkpoint.hpp"
#include "ucorr/config.hpp"
#include "ucorr/model.hpp"
#include "ucorr/rng.hpp"

namespace ucorr {
namespace {

TEST(ConfigTest, TrainingDefaults) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.train.epochs, 15);
  EXPECT_EQ(cfg.train.batch_size, 4);
  EXPECT_EQ(cfg.train.learning_rate, 5e-3f);
  EXPECT_EQ(cfg.train.lr_decay, 0.9f);
  EXPECT_EQ(cfg.train.momentum, 0.9f);
  EXPECT_EQ(cfg.train.weight_decay, 0.01f);
  EXPECT_EQ(cfg.train.model.corr.max_displacement, 4);
  EXPECT_EQ(cfg.train.loss.positive_weight, 20.0f);
  EXPECT_EQ(cfg.train.loss.lambda, 0.8f);
  EXPECT_EQ(cfg.data.train_flights + cfg.data.val_flights + cfg.data.test_flights, 40);
  EXPECT_EQ(cfg.data.frames_per_flight, 10);
}

TEST(ConfigTest, DumpParseRoundTrip) {
  RunConfig cfg;
  cfg.train.epochs = 7;
  cfg.train.learning_rate = 1.25e-3f;
  cfg.train.model.variant = Variant::kUnet3f;
  cfg.train.model.corr.normalize = true;
  cfg.train.augmentation.gamma.enabled = false;
  cfg.data.scene.baseline = 0.375;
  cfg.data.seed = 99;
  cfg.eval.split = "val";
  const std::string dump = dump_config(cfg);
  const RunConfig back = parse_config(dump);
  EXPECT_EQ(dump_config(back), dump);
  EXPECT_EQ(back.train.epochs, 7);
  EXPECT_EQ(back.train.learning_rate, 1.25e-3f);
  EXPECT_EQ(back.train.model.variant, Variant::kUnet3f);
  EXPECT_TRUE(back.train.model.corr.normalize);
  EXPECT_FALSE(back.train.augmentation.gamma.enabled);
  EXPECT_EQ(back.data.scene.baseline, 0.375);
  EXPECT_EQ(back.eval.split, "val");
  EXPECT_NE(dump_config(RunConfig{}), dump);
}

TEST(ConfigTest, PartialFilesKeepBaseValues) {
  RunConfig base;
  base.train.seed = 5;
  const RunConfig cfg = parse_config("# comment\ntrain.epochs = 2   # trailing\n\nmodel.base_channels=8\n", base);
  EXPECT_EQ(cfg.train.epochs, 2);
  EXPECT_EQ(cfg.train.model.base_channels, 8);
  EXPECT_EQ(cfg.train.seed, 5U);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse_config("train.nonsense = 1"), std::invalid_argument);
  EXPECT_THROW(parse_config("train.epochs"), std::invalid_argument);
  EXPECT_THROW(parse_config("train.epochs = many"), std::invalid_argument);
  EXPECT_THROW(parse_config("model.variant = resnet"), std::invalid_argument);
  try {
    parse_config("train.epochs = 1\ntrain.bogus = 2", {}, "run.cfg");
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, LoadFromFile) {
  testing::TempDir dir("config");
  const auto path = dir.path() / "a.cfg";
  std::ofstream(path) << "train.batch_size = 2\n";
  EXPECT_EQ(load_config(path).train.batch_size, 2);
  EXPECT_THROW(load_config(dir.path() / "missing.cfg"), std::runtime_error);
}

TEST(ConfigTest, Presets) {
  const RunConfig desk = preset_config("desk");
  EXPECT_EQ(desk.train.model.input_height, 64);
  EXPECT_EQ(desk.train.model.corr.max_displacement, 4);
  EXPECT_NO_THROW(desk.train.validate());
  EXPECT_EQ(desk.train.optimizer, OptimizerKind::kAdam);
  EXPECT_EQ(RunConfig{}.train.optimizer, OptimizerKind::kSgd);
  const RunConfig full = preset_config("full");
  EXPECT_EQ(full.train.epochs, 15);
  EXPECT_EQ(full.train.model.corr.max_displacement, 10);
  EXPECT_EQ(full.train.model.input_height, 480);
  EXPECT_EQ(full.train.model.input_width % 8, 0);
  EXPECT_EQ(full.data.train_flights, 300);
  EXPECT_NO_THROW(full.train.validate());
  EXPECT_THROW(preset_config("huge"), std::invalid_argument);
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.base_channels = 4;
  m.encoder_depth = 3;
  m.input_height = 16;
  m.input_width = 16;
  m.corr.max_displacement = 2;
  return m;
}

Checkpoint sample_checkpoint(Model& model, std::uint64_t seed) {
  OptimizerState state(model.parameters(), 1e-3f, 0.9f, 0.01f);
  Rng rng(seed);
  for (auto& v : state.velocity) {
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return capture_checkpoint(model.parameters(), state, 3, 1234);
}

TEST(CheckpointTest, EncodeDecodeIsExact) {
  Model model(tiny_model(), 1);
  const Checkpoint ckpt = sample_checkpoint(model, 2);
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ckpt));
  ASSERT_EQ(back.parameters.size(), ckpt.parameters.size());
  for (std::size_t i = 0; i < ckpt.parameters.size(); ++i) {
    EXPECT_EQ(back.parameters[i].name, ckpt.parameters[i].name);
    EXPECT_EQ(back.parameters[i].shape, ckpt.parameters[i].shape);
    EXPECT_EQ(back.parameters[i].values, ckpt.parameters[i].values);
    EXPECT_EQ(back.velocities[i].values, ckpt.velocities[i].values);
  }
  EXPECT_EQ(back.epoch, 3U);
  EXPECT_EQ(back.step, 1234U);
  EXPECT_EQ(back.learning_rate, 1e-3f);
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(ckpt));
}

TEST(CheckpointTest, RestoreRecoversParametersAndVelocity) {
  Model source(tiny_model(), 1);
  const Checkpoint ckpt = sample_checkpoint(source, 3);
  testing::TempDir dir("ckpt");
  save_checkpoint(dir.path() / "a.ckpt", ckpt);

  Model target(tiny_model(), 99);
  OptimizerState state(target.parameters(), 1e-3f, 0.9f, 0.01f);
  restore_checkpoint(load_checkpoint(dir.path() / "a.ckpt"), target.parameters(), &state);
  for (std::size_t i = 0; i < source.parameters().size(); ++i) {
    const auto a = source.parameters()[i].tensor.data();
    const auto b = target.parameters()[i].tensor.data();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end())) << source.parameters()[i].name;
    EXPECT_EQ(state.velocity[i], ckpt.velocities[i].values);
  }
}

TEST(CheckpointTest, RejectsMismatches) {
  Model model(tiny_model(), 1);
  Checkpoint ckpt = sample_checkpoint(model, 4);
  auto bytes = encode_checkpoint(ckpt);
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), std::runtime_error);
  bytes.pop_back();
  EXPECT_THROW(decode_checkpoint(bytes), std::runtime_error);

  ModelConfig wider = tiny_model();
  wider.base_channels = 8;
  Model other(wider, 1);
  EXPECT_THROW(restore_checkpoint(ckpt, other.parameters(), nullptr), ShapeError);
  ckpt.parameters.pop_back();
  EXPECT_THROW(restore_checkpoint(ckpt, model.parameters(), nullptr), std::runtime_error);
}

TEST(CheckpointTest, AdamStateRoundTrips) {
  Model source(tiny_model(), 1);
  OptimizerState adam(source.parameters(), 1e-3f, 0.9f, 0.01f, OptimizerKind::kAdam);
  Rng rng(8);
  for (auto* buffers : {&adam.velocity, &adam.second_moment}) {
    for (auto& v : *buffers) {
      for (auto& x : v) x = static_cast<float>(rng.uniform(0.0, 1.0));
    }
  }
  adam.steps = 17;
  const Checkpoint ckpt = decode_checkpoint(encode_checkpoint(capture_checkpoint(source.parameters(), adam, 1, 17)));

  Model target(tiny_model(), 2);
  OptimizerState back(target.parameters(), 1e-3f, 0.9f, 0.01f, OptimizerKind::kAdam);
  restore_checkpoint(ckpt, target.parameters(), &back);
  EXPECT_EQ(back.steps, 17U);
  EXPECT_EQ(back.velocity, adam.velocity);
  EXPECT_EQ(back.second_moment, adam.second_moment);

  // An SGD checkpoint carries no second moments.
  const Checkpoint sgd = sample_checkpoint(source, 5);
  EXPECT_TRUE(sgd.second_moments.empty());
  EXPECT_THROW(restore_checkpoint(sgd, target.parameters(), &back), std::runtime_error);
}

TEST(ConfigTest, OptimizerKey) {
  RunConfig cfg = parse_config("train.optimizer = adam\ntrain.depth_bias_init = false\n");
  EXPECT_EQ(cfg.train.optimizer, OptimizerKind::kAdam);
  EXPECT_FALSE(cfg.train.depth_bias_init);
  EXPECT_NE(dump_config(cfg).find("train.optimizer = adam"), std::string::npos);
  EXPECT_THROW(parse_config("train.optimizer = lbfgs\n"), std::invalid_argument);
}

}  // namespace
}  // namespace ucorr
