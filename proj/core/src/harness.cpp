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

#include "ucorr/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "ucorr/augment.hpp"
#include "ucorr/dataset.hpp"
#include "ucorr/ops.hpp"
#include "ucorr/optim.hpp"
#include "ucorr/rng.hpp"

namespace ucorr {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kInitKey = 11;
constexpr std::uint64_t kShuffleKey = 12;
constexpr std::uint64_t kAugmentKey = 13;
constexpr char kLogHeader[] = "step,epoch,lr,total,wire,mae,msssim";

std::string format_log_row(const StepLog& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g", static_cast<long long>(r.step), r.epoch,
                static_cast<double>(r.lr), r.total, r.wire, r.mae, r.msssim);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  detail::write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {kShuffleKey, static_cast<std::uint64_t>(epoch)}));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::string checkpoint_name(std::int64_t step) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "step_%08lld.ckpt", static_cast<long long>(step));
  return buf;
}

std::optional<double> metric_value(const EvalReport& r, const std::string& name) {
  if (name == "iou") return r.iou;
  if (name == "auc") return r.auc;
  if (name == "ap") return r.ap;
  if (name == "precision") return r.precision;
  if (name == "recall") return r.recall;
  if (name == "f1") return r.f1;
  if (name == "abs_rel") return r.abs_rel;
  if (name == "mae") return r.mae;
  if (name == "abs_rel_wd") return r.abs_rel_wd;
  throw std::invalid_argument("unknown metric " + name);
}

std::string cell(std::optional<double> v, const char* fmt = "%.4f") {
  if (!v) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string metrics_table(const std::string& title, const std::vector<std::string>& columns,
                          const std::vector<std::pair<std::string, EvalReport>>& reports) {
  std::string out = "# " + title + "\n" + pad("variant", 16);
  for (const auto& c : columns) out += pad(c, 12);
  out += "\n";
  for (const auto& [name, report] : reports) {
    out += pad(name, 16);
    for (const auto& c : columns) out += pad(cell(metric_value(report, c)), 12);
    out += "\n";
  }
  return out;
}

std::array<float, 3> depth_color(float t) {
  static constexpr float kStops[5][3] = {
      {0.99f, 0.99f, 0.75f}, {0.99f, 0.6f, 0.36f}, {0.85f, 0.27f, 0.42f}, {0.45f, 0.12f, 0.5f}, {0.05f, 0.03f, 0.15f}};
  t = std::clamp(t, 0.0f, 1.0f) * 4.0f;
  const int i = std::min(3, static_cast<int>(t));
  const float f = t - static_cast<float>(i);
  return {kStops[i][0] + (kStops[i + 1][0] - kStops[i][0]) * f, kStops[i][1] + (kStops[i + 1][1] - kStops[i][1]) * f,
          kStops[i][2] + (kStops[i + 1][2] - kStops[i][2]) * f};
}

}  // namespace

Tensor images_to_tensor(std::span<const Image* const> images) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor needs at least one image");
  const Image& first = *images.front();
  const std::int64_t n = static_cast<std::int64_t>(images.size());
  const std::int64_t c = first.channels, h = first.height, w = first.width;
  std::vector<float> data(static_cast<std::size_t>(n * c * h * w));
  for (std::int64_t i = 0; i < n; ++i) {
    const Image& img = *images[static_cast<std::size_t>(i)];
    if (img.channels != c || img.height != h || img.width != w) {
      throw ShapeError("images in a batch must share one size");
    }
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        for (std::int64_t k = 0; k < c; ++k) {
          data[static_cast<std::size_t>(((i * c + k) * h + y) * w + x)] =
              img.at(static_cast<int>(y), static_cast<int>(x), static_cast<int>(k));
        }
      }
    }
  }
  return Tensor::from_data(Shape{n, c, h, w}, std::move(data));
}

Image tensor_to_image(const Tensor& t, std::int64_t n) {
  if (t.shape().rank() != 4) throw ShapeError("tensor_to_image expects NCHW, got " + t.shape().str());
  const auto c = t.dim(1), h = t.dim(2), w = t.dim(3);
  Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t k = 0; k < c; ++k) {
        img.at(static_cast<int>(y), static_cast<int>(x), static_cast<int>(k)) = t.at(n, k, y, x);
      }
    }
  }
  return img;
}

Batch make_batch(std::span<const Sample* const> samples, int frame_count) {
  if (samples.empty()) throw std::invalid_argument("empty batch");
  Batch batch;
  std::vector<const Image*> ptrs(samples.size());
  for (int f = 0; f < frame_count; ++f) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& frames = samples[i]->frames;
      if (static_cast<int>(frames.size()) < frame_count) {
        throw std::invalid_argument("sample has " + std::to_string(frames.size()) + " frames, model needs " +
                                    std::to_string(frame_count));
      }
      ptrs[i] = &frames[frames.size() - static_cast<std::size_t>(frame_count) + static_cast<std::size_t>(f)];
    }
    batch.frames.push_back(images_to_tensor(ptrs));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) ptrs[i] = &samples[i]->wire_mask;
  batch.wire = images_to_tensor(ptrs);
  for (std::size_t i = 0; i < samples.size(); ++i) ptrs[i] = &samples[i]->depth;
  batch.depth = images_to_tensor(ptrs);
  return batch;
}

int required_context(const ModelConfig& cfg) { return std::max(2, cfg.frame_count()); }

std::int64_t steps_per_epoch(const TrainConfig& cfg, std::size_t samples) {
  const auto n = static_cast<std::int64_t>(samples);
  return (n + cfg.batch_size - 1) / cfg.batch_size;
}

TrainResult train_model(const RunConfig& run, const std::vector<Sample>& samples, const TrainOptions& opts) {
  const TrainConfig& cfg = run.train;
  cfg.validate();
  std::size_t n = samples.size();
  if (cfg.max_samples > 0) n = std::min(n, static_cast<std::size_t>(cfg.max_samples));
  if (n == 0) throw std::invalid_argument("no training samples");
  const int frames = cfg.model.frame_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[i];
    if (static_cast<int>(s.frames.size()) < frames) {
      throw std::invalid_argument("training data provides " + std::to_string(s.frames.size()) +
                                  " frames per sample; " + std::string(variant_name(cfg.model.variant)) + " needs " +
                                  std::to_string(frames));
    }
    if (s.height() != cfg.model.input_height || s.width() != cfg.model.input_width) {
      throw std::invalid_argument("training data is " + std::to_string(s.height()) + "x" + std::to_string(s.width()) +
                                  " but the model expects " + std::to_string(cfg.model.input_height) + "x" +
                                  std::to_string(cfg.model.input_width));
    }
  }

  TrainResult result{Model(cfg.model, derive_seed(cfg.seed, {kInitKey})), {}, 0, std::nullopt};
  Model& model = result.model;
  auto& params = model.parameters();
  if (cfg.depth_bias_init) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (float d : samples[i].depth.data) sum += d;
      count += static_cast<std::int64_t>(samples[i].depth.data.size());
    }
    if (count > 0 && sum > 0.0) model.set_depth_bias(sum / static_cast<double>(count));
  }
  OptimizerState state(params, cfg.learning_rate, cfg.momentum, cfg.weight_decay, cfg.optimizer);
  std::int64_t step = 0;
  if (opts.resume_from) {
    const Checkpoint ckpt = load_checkpoint(*opts.resume_from);
    restore_checkpoint(ckpt, params, &state);
    step = static_cast<std::int64_t>(ckpt.step);
  }

  const std::int64_t spe = steps_per_epoch(cfg, n);
  std::int64_t last = spe * cfg.epochs;
  if (cfg.max_steps > 0) last = std::min(last, cfg.max_steps);
  const std::int64_t stop = opts.stop_after > 0 ? std::min(last, opts.stop_after) : last;

  const bool files = !opts.run_dir.empty();
  std::ofstream log;
  if (files) {
    fs::create_directories(opts.run_dir / "checkpoints");
    fs::create_directories(opts.run_dir / "logs");
    fs::create_directories(opts.run_dir / "reports");
    write_text(opts.run_dir / "config.cfg", dump_config(run));
    std::vector<std::string> kept;
    const fs::path log_path = opts.run_dir / "logs" / "train.csv";
    if (opts.resume_from && fs::exists(log_path)) {
      std::ifstream in(log_path);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (!line.empty() && std::stoll(line.substr(0, line.find(','))) <= step) kept.push_back(line);
      }
    }
    log.open(log_path, std::ios::trunc);
    log << kLogHeader << "\n";
    for (const auto& l : kept) log << l << "\n";
  }

  auto save = [&](std::int64_t at) {
    const fs::path path = opts.run_dir / "checkpoints" / checkpoint_name(at);
    save_checkpoint(path, capture_checkpoint(params, state, static_cast<std::uint32_t>(at / spe),
                                             static_cast<std::uint64_t>(at)));
    return path;
  };

  auto prepare = [&](std::int64_t at) {
    const int epoch = static_cast<int>(at / spe);
    const auto order = epoch_order(cfg.seed, epoch, n);
    const auto begin = static_cast<std::size_t>((at % spe) * cfg.batch_size);
    const auto end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
    std::vector<Sample> batch_samples;
    for (std::size_t i = begin; i < end; ++i) {
      const Sample& s = samples[order[i]];
      if (cfg.augment) {
        batch_samples.push_back(augment(s, cfg.augmentation,
                                        derive_seed(cfg.seed, {kAugmentKey, static_cast<std::uint64_t>(epoch),
                                                               static_cast<std::uint64_t>(i)})));
      } else {
        batch_samples.push_back(s);
      }
    }
    std::vector<const Sample*> ptrs;
    for (const auto& s : batch_samples) ptrs.push_back(&s);
    return make_batch(ptrs, frames);
  };

  std::future<Batch> next;
  if (!cfg.deterministic && step < stop) next = std::async(std::launch::async, prepare, step);
  while (step < stop) {
    const int epoch = static_cast<int>(step / spe);
    state.learning_rate = learning_rate_at_epoch(cfg.learning_rate, cfg.lr_decay, epoch);
    Batch batch = cfg.deterministic ? prepare(step) : next.get();
    if (!cfg.deterministic && step + 1 < stop) next = std::async(std::launch::async, prepare, step + 1);

    const auto out = model.forward(batch.frames);
    const auto loss = total_loss(out, batch.wire, batch.depth, cfg.loss);
    if (!std::isfinite(loss.total)) {
      throw std::runtime_error("training diverged at step " + std::to_string(step) + " (non-finite loss)");
    }
    backward(loss.total_tensor);
    optimizer_step(params, state);
    ++step;

    StepLog row{step, epoch, state.learning_rate, loss.total, loss.wire, loss.depth_mae, loss.depth_msssim};
    result.log.push_back(row);
    if (files) log << format_log_row(row) << "\n" << std::flush;
    if (opts.on_step) opts.on_step(row);
    if (files && step % spe == 0 && cfg.checkpoint_every > 0 && (step / spe) % cfg.checkpoint_every == 0) {
      save(step);
    }
  }
  result.steps = step;
  if (files) {
    const fs::path path = save(step);
    std::error_code ec;
    fs::copy_file(path, opts.run_dir / "checkpoints" / "final.ckpt", fs::copy_options::overwrite_existing, ec);
    if (ec) throw std::runtime_error("cannot write final checkpoint: " + ec.message());
    result.final_checkpoint = opts.run_dir / "checkpoints" / "final.ckpt";
    log.close();
    write_text(opts.run_dir / "reports" / "loss_curve.svg",
               loss_curve_svg(read_train_log(opts.run_dir / "logs" / "train.csv")));
  }
  return result;
}

std::vector<Prediction> predict(const Model& model, const std::vector<Sample>& samples, int batch_size) {
  NoGradGuard no_grad;
  std::vector<Prediction> preds;
  const int frames = model.config().frame_count();
  for (std::size_t begin = 0; begin < samples.size(); begin += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(samples.size(), begin + static_cast<std::size_t>(batch_size));
    std::vector<const Sample*> ptrs;
    for (std::size_t i = begin; i < end; ++i) ptrs.push_back(&samples[i]);
    const Batch batch = make_batch(ptrs, frames);
    const auto out = model.forward(batch.frames);
    const auto prob = sigmoid(out.wire_logits);
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      preds.push_back({tensor_to_image(prob, static_cast<std::int64_t>(i)),
                       tensor_to_image(out.depth, static_cast<std::int64_t>(i))});
    }
  }
  return preds;
}

EvalReport evaluate_predictions(const std::vector<Sample>& samples, const std::vector<Prediction>& preds,
                                const EvalConfig& cfg) {
  if (samples.size() != preds.size()) throw std::invalid_argument("one prediction per sample required");
  MetricAccumulator acc(cfg.threshold, cfg.wd_dilation, cfg.macro);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    acc.add_image(preds[i].wire_prob.data, s.wire_mask.data, preds[i].depth.data, s.depth.data, s.height(),
                  s.width());
  }
  return acc.report();
}

EvalReport evaluate_model(const Model& model, const std::vector<Sample>& samples, const EvalConfig& cfg) {
  return evaluate_predictions(samples, predict(model, samples), cfg);
}

void write_report(const fs::path& dir, const std::string& stem, const EvalReport& report,
                  const std::string& model_name) {
  fs::create_directories(dir);
  write_text(dir / (stem + ".txt"), format_report_table(report, model_name));
  write_text(dir / (stem + ".kv"), format_report_kv(report));
}

std::optional<double> percent_delta(std::optional<double> value, std::optional<double> reference) {
  if (!value || !reference || *reference == 0.0) return std::nullopt;
  return 100.0 * (*value - *reference) / *reference;
}

AblationTable make_ablation_table(const std::string& title, const std::string& reference,
                                  const std::vector<std::string>& variants,
                                  const std::vector<std::pair<std::string, EvalReport>>& reports) {
  auto find = [&](const std::string& name) -> const EvalReport& {
    for (const auto& [n, r] : reports) {
      if (n == name) return r;
    }
    throw std::invalid_argument("no report for variant " + name);
  };
  AblationTable table{title, reference, {"precision", "recall", "f1", "abs_rel", "abs_rel_wd"}, {}};
  const EvalReport& ref = find(reference);
  for (const auto& v : variants) {
    AblationRow row{v, {}, {}};
    const EvalReport& r = find(v);
    for (const auto& c : table.columns) {
      row.values.push_back(metric_value(r, c));
      row.deltas.push_back(percent_delta(metric_value(r, c), metric_value(ref, c)));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_ablation_table(const AblationTable& table) {
  std::string out = "# " + table.title + " (deltas in % vs " + table.reference + ")\n" + pad("variant", 16);
  for (const auto& c : table.columns) out += pad(c, 22);
  out += "\n";
  for (const auto& row : table.rows) {
    out += pad(row.variant, 16);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out += pad(cell(row.values[i]) + " (" + cell(row.deltas[i], "%+.2f") + ")", 22);
    }
    out += "\n";
  }
  return out;
}

AblationResult run_ablation(const RunConfig& cfg, const std::vector<Sample>& train_set,
                            const std::vector<Sample>& eval_set, const fs::path& out_dir,
                            const std::function<void(const std::string&)>& progress) {
  AblationResult result;
  const auto suite = make_variant_suite(cfg.train.model);
  for (const auto& m : suite) {
    const std::string name(variant_name(m.variant));
    if (progress) progress(name);
    RunConfig vcfg = cfg;
    vcfg.train.model = m;
    TrainOptions opts;
    if (!out_dir.empty()) opts.run_dir = out_dir / name;
    const auto trained = train_model(vcfg, train_set, opts);
    const EvalReport report = evaluate_model(trained.model, eval_set, cfg.eval);
    if (!out_dir.empty()) write_report(opts.run_dir / "reports", "eval_" + cfg.eval.split, report, name);
    result.reports.emplace_back(name, report);
  }

  result.tables[0] = make_ablation_table("Correlation layer location", "ucorr_deep",
                                         {"ucorr_deep", "ucorr_shallow", "ucorr_pixel"}, result.reports);
  result.tables[1] = make_ablation_table("UNet input frames", "unet_1f", {"unet_1f", "unet_2f", "unet_3f"},
                                         result.reports);
  result.tables[2] =
      make_ablation_table("Skip connections", "ucorr_deep", {"ucorr_deep", "ucorr_noskip"}, result.reports);

  std::string summary = metrics_table("Wire segmentation", {"iou", "auc", "ap", "precision", "recall", "f1"},
                                      result.reports);
  summary += "\n" + metrics_table("Depth estimation", {"abs_rel", "mae", "abs_rel_wd"}, result.reports) + "\n";
  summary += "# ucorr_deep vs unet_1f\n";
  const EvalReport* deep = nullptr;
  const EvalReport* unet = nullptr;
  for (const auto& [n, r] : result.reports) {
    if (n == "ucorr_deep") deep = &r;
    if (n == "unet_1f") unet = &r;
  }
  for (const char* c : kReportColumns) {
    const auto a = metric_value(*deep, c);
    const auto b = metric_value(*unet, c);
    std::string direction = "n/a";
    if (a && b) direction = *a > *b ? "higher" : (*a < *b ? "lower" : "equal");
    summary += pad(c, 12) + pad(cell(a), 10) + pad(cell(b), 10) + pad(cell(percent_delta(a, b), "%+.2f%%"), 12) +
               direction + "\n";
  }
  result.summary = summary;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir / "tables");
    write_text(out_dir / "tables" / "summary.txt", summary);
    write_text(out_dir / "tables" / "correlation_location.txt", format_ablation_table(result.tables[0]));
    write_text(out_dir / "tables" / "input_frames.txt", format_ablation_table(result.tables[1]));
    write_text(out_dir / "tables" / "skip_connections.txt", format_ablation_table(result.tables[2]));
    std::string raw;
    for (const auto& [n, r] : result.reports) {
      for (const char* c : kReportColumns) raw += n + "." + c + " = " + cell(metric_value(r, c), "%.9f") + "\n";
    }
    write_text(out_dir / "tables" / "raw_metrics.kv", raw);
  }
  return result;
}

std::optional<fs::path> run_config_for(const fs::path& checkpoint) {
  const fs::path candidate = checkpoint.parent_path().parent_path() / "config.cfg";
  if (fs::exists(candidate)) return candidate;
  return std::nullopt;
}

Model load_model(const fs::path& checkpoint, const TrainConfig& cfg) {
  Model model(cfg.model, 0);
  restore_checkpoint(load_checkpoint(checkpoint), model.parameters(), nullptr);
  return model;
}

InferenceOutputs run_inference(const Model& model, const std::vector<Image>& frames, const fs::path& out_dir,
                               float far_plane) {
  const auto& mc = model.config();
  if (static_cast<int>(frames.size()) < mc.frame_count()) {
    throw std::invalid_argument(std::string(variant_name(mc.variant)) + " needs " +
                                std::to_string(mc.frame_count()) + " frames");
  }
  const int h = frames.front().height;
  const int w = frames.front().width;
  for (const auto& f : frames) {
    if (f.height != h || f.width != w || f.channels != 3) {
      throw std::invalid_argument("input frames must be RGB images of one size; got " + std::to_string(h) + "x" +
                                  std::to_string(w) + " and " + std::to_string(f.height) + "x" +
                                  std::to_string(f.width));
    }
  }
  Sample s;
  for (const auto& f : frames) s.frames.push_back(resize_nni(f, mc.input_height, mc.input_width));
  s.wire_mask = Image(mc.input_height, mc.input_width, 1);
  s.depth = Image(mc.input_height, mc.input_width, 1);
  const auto pred = predict(model, {s}, 1).front();
  const Image prob = resize_nni(pred.wire_prob, h, w);
  const Image depth = resize_nni(pred.depth, h, w);

  Image panel(h, 3 * w, 3);
  const Image& cur = frames.back();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float p = prob.at(y, x);
      const auto col = depth_color(depth.at(y, x) / far_plane);
      for (int c = 0; c < 3; ++c) {
        panel.at(y, x, c) = cur.at(y, x, c);
        const float red = c == 0 ? 1.0f : 0.0f;
        panel.at(y, w + x, c) = cur.at(y, x, c) * (1.0f - p) + red * p;
        panel.at(y, 2 * w + x, c) = col[c];
      }
    }
  }
  fs::create_directories(out_dir);
  InferenceOutputs outputs{out_dir / "wire_prob.png", out_dir / "depth.utf", out_dir / "panel.png"};
  write_png(outputs.wire_png, prob);
  write_tensor_file(outputs.depth_utf, depth);
  write_png(outputs.panel_png, panel);
  return outputs;
}

std::vector<StepLog> read_train_log(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::string line;
  std::getline(in, line);
  if (line != kLogHeader) throw std::runtime_error(csv.string() + ": unexpected header");
  std::vector<StepLog> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    StepLog r;
    long long step = 0;
    double lr = 0.0;
    if (std::sscanf(line.c_str(), "%lld,%d,%lf,%lf,%lf,%lf,%lf", &step, &r.epoch, &lr, &r.total, &r.wire, &r.mae,
                    &r.msssim) != 7) {
      throw std::runtime_error(csv.string() + ": malformed row '" + line + "'");
    }
    r.step = step;
    r.lr = static_cast<float>(lr);
    rows.push_back(r);
  }
  return rows;
}

std::string loss_curve_svg(const std::vector<StepLog>& log) {
  constexpr double kW = 640, kH = 360, kM = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kM << "\" y1=\"" << kH - kM << "\" x2=\"" << kW - kM << "\" y2=\"" << kH - kM
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kM << "\" y1=\"" << kM << "\" x2=\"" << kM << "\" y2=\"" << kH - kM
      << "\" stroke=\"black\"/>\n";
  if (!log.empty()) {
    double hi = 0.0;
    for (const auto& r : log) hi = std::max(hi, r.total);
    if (hi <= 0.0) hi = 1.0;
    const double s0 = static_cast<double>(log.front().step);
    const double s1 = std::max(s0 + 1.0, static_cast<double>(log.back().step));
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : log) {
      const double x = kM + (static_cast<double>(r.step) - s0) / (s1 - s0) * (kW - 2 * kM);
      const double y = kH - kM - std::max(0.0, r.total) / hi * (kH - 2 * kM);
      svg << x << "," << y << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kM << "\" y=\"" << kM - 10 << "\" font-size=\"12\">total loss (max " << hi
        << ")</text>\n";
    svg << "<text x=\"" << kW - kM - 60 << "\" y=\"" << kH - 10 << "\" font-size=\"12\">step " << log.back().step
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ucorr
