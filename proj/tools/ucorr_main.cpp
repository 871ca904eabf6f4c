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

// ucorr command-line driver: dataset generation, training, evaluation,
// ablation and inference.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ucorr/config.hpp"
#include "ucorr/dataset.hpp"
#include "ucorr/harness.hpp"

namespace fs = std::filesystem;
using namespace ucorr;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string variant;
  bool deterministic = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Config file, or a preset name (desk, full)");
  app->add_option("--set", f.overrides, "Config override key=value (repeatable)");
  app->add_option("--seed", f.seed, "Seed for data generation and training");
  app->add_option("--variant", f.variant, "Model variant (ucorr_deep, ucorr_shallow, ucorr_pixel, unet_1f, ...)");
  app->add_flag("--deterministic", f.deterministic, "Synchronous data loading");
}

RunConfig resolve(const CommonFlags& f, std::optional<fs::path> fallback = std::nullopt) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = fs::exists(f.config) ? load_config(f.config) : preset_config(f.config);
  } else if (fallback) {
    cfg = load_config(*fallback);
  }
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) {
    cfg.train.seed = *f.seed;
    cfg.data.seed = *f.seed;
  }
  if (!f.variant.empty()) cfg.train.model.variant = parse_variant(f.variant);
  if (f.deterministic) cfg.train.deterministic = true;
  return cfg;
}

bool non_empty(const fs::path& p) { return fs::exists(p) && !(fs::is_directory(p) && fs::is_empty(p)); }

void log_progress(const StepLog& r, std::int64_t every) {
  if (r.step % every == 0) {
    spdlog::info("step {} epoch {} lr {:.3g} loss {:.4f} (wire {:.4f} mae {:.4f} msssim {:.4f})", r.step, r.epoch,
                 r.lr, r.total, r.wire, r.mae, r.msssim);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wire segmentation and depth estimation from sequential frames"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  std::string gen_out;
  bool gen_force = false;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic flight dataset");
  add_common(gen, gen_flags);
  gen->add_option("--out", gen_out, "Dataset root")->required();
  gen->add_flag("--force", gen_force, "Overwrite a non-empty root");

  CommonFlags train_flags;
  std::string train_data, train_out, train_split = "train", train_resume;
  bool train_force = false;
  auto* train = app.add_subcommand("train", "Train a model");
  add_common(train, train_flags);
  train->add_option("--data", train_data, "Dataset root")->required();
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--split", train_split, "Training split");
  train->add_option("--resume", train_resume, "Checkpoint to continue from");
  train->add_flag("--force", train_force, "Reuse a non-empty run directory");

  CommonFlags eval_flags;
  std::string eval_ckpt, eval_data, eval_split, eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  add_common(eval, eval_flags);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--data", eval_data, "Dataset root")->required();
  eval->add_option("--split", eval_split, "Split to evaluate (default from config)");
  eval->add_option("--out", eval_out, "Report directory (default: the run's reports/)");

  CommonFlags ablate_flags;
  std::string ablate_data, ablate_out;
  bool ablate_force = false;
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate all seven variants");
  add_common(ablate, ablate_flags);
  ablate->add_option("--data", ablate_data, "Dataset root")->required();
  ablate->add_option("--out", ablate_out, "Output directory")->required();
  ablate->add_flag("--force", ablate_force, "Reuse a non-empty output directory");

  CommonFlags infer_flags;
  std::string infer_ckpt, infer_out;
  std::vector<std::string> infer_frames;
  auto* infer = app.add_subcommand("infer", "Predict wires and depth for a frame sequence");
  add_common(infer, infer_flags);
  infer->add_option("--checkpoint", infer_ckpt, "Checkpoint file")->required();
  infer->add_option("--frames", infer_frames, "Frame PNGs, oldest first (current frame last)")->required();
  infer->add_option("--out", infer_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const RunConfig cfg = resolve(gen_flags);
      const auto summary = write_dataset(cfg.data, gen_out, gen_force);
      std::cout << format_summary(summary);
    } else if (train->parsed()) {
      const RunConfig cfg = resolve(train_flags);
      if (train_resume.empty() && non_empty(train_out) && !train_force) {
        throw std::runtime_error(train_out + " is not empty (use --force or --resume)");
      }
      const auto samples = read_dataset(train_data, train_split, required_context(cfg.train.model));
      spdlog::info("{} training samples, {} steps per epoch", samples.size(),
                   steps_per_epoch(cfg.train, samples.size()));
      TrainOptions opts;
      opts.run_dir = train_out;
      if (!train_resume.empty()) opts.resume_from = fs::path(train_resume);
      const auto every = std::max<std::int64_t>(1, steps_per_epoch(cfg.train, samples.size()) / 4);
      opts.on_step = [every](const StepLog& r) { log_progress(r, every); };
      const auto result = train_model(cfg, samples, opts);
      std::cout << "final checkpoint: " << result.final_checkpoint->string() << "\n";
    } else if (eval->parsed()) {
      const fs::path ckpt = eval_ckpt;
      const RunConfig cfg = resolve(eval_flags, run_config_for(ckpt));
      const std::string split = eval_split.empty() ? cfg.eval.split : eval_split;
      const Model model = load_model(ckpt, cfg.train);
      const auto samples = read_dataset(eval_data, split, required_context(cfg.train.model));
      const auto report = evaluate_model(model, samples, cfg.eval);
      const fs::path out = eval_out.empty() ? ckpt.parent_path().parent_path() / "reports" : fs::path(eval_out);
      write_report(out, "eval_" + split, report, std::string(variant_name(cfg.train.model.variant)));
      std::cout << format_report_table(report, std::string(variant_name(cfg.train.model.variant)));
    } else if (ablate->parsed()) {
      const RunConfig cfg = resolve(ablate_flags);
      if (non_empty(ablate_out) && !ablate_force) {
        throw std::runtime_error(ablate_out + " is not empty (use --force)");
      }
      // One shared sample set for all variants: three-frame context so the
      // three-frame UNet sees the same current frames as everyone else.
      const auto train_set = read_dataset(ablate_data, "train", 3);
      const auto eval_set = read_dataset(ablate_data, cfg.eval.split, 3);
      const auto result = run_ablation(cfg, train_set, eval_set, ablate_out,
                                       [](const std::string& v) { spdlog::info("training {}", v); });
      std::cout << result.summary << "\n";
      for (const auto& t : result.tables) std::cout << format_ablation_table(t) << "\n";
    } else if (infer->parsed()) {
      const fs::path ckpt = infer_ckpt;
      const RunConfig cfg = resolve(infer_flags, run_config_for(ckpt));
      const Model model = load_model(ckpt, cfg.train);
      std::vector<Image> frames;
      for (const auto& p : infer_frames) frames.push_back(read_png(p));
      const auto out = run_inference(model, frames, infer_out, static_cast<float>(cfg.data.scene.far_plane));
      std::cout << out.wire_png.string() << "\n" << out.depth_utf.string() << "\n" << out.panel_png.string() << "\n";
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
