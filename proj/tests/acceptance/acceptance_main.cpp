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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradient_suite.hpp"
#include "oracles.hpp"
#include "ucorr/augment.hpp"
#include "ucorr/correlation.hpp"
#include "ucorr/dataset.hpp"
#include "ucorr/harness.hpp"
#include "ucorr/losses.hpp"
#include "ucorr/metrics.hpp"
#include "ucorr/ops.hpp"
#include "ucorr/optim.hpp"
#include "ucorr/synth.hpp"

namespace ucorr {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed condition without stopping the check.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<float> random_mask(std::size_t n, std::uint64_t seed, double rate) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution b(rate);
  std::vector<float> m(n);
  for (auto& v : m) v = b(gen) ? 1.0f : 0.0f;
  return m;
}

std::vector<float> random_values(std::size_t n, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_case;
  const auto cases = testing::gradient_cases();
  for (const auto& c : cases) {
    for (int seed = 0; seed < testing::kGradSeeds; ++seed) {
      const double err = c.run(static_cast<std::uint64_t>(1000 + 17 * seed));
      if (err > worst || !std::isfinite(err)) {
        worst = err;
        worst_case = c.name + " seed " + std::to_string(seed);
      }
      o.require(err <= testing::kGradTolerance, c.name + " seed " + std::to_string(seed) + " error " + fmt("%.3g", err));
    }
  }
  const double secs = seconds_since(t0);
  o.require(testing::kGradSeeds >= 10, "fewer than 10 seeds");
  o.require(secs < 120.0, "runtime " + fmt("%.1f", secs) + " s");
  if (o.pass) {
    o.detail = std::to_string(cases.size()) + " ops x " + std::to_string(testing::kGradSeeds) +
               " seeds, worst " + fmt("%.2e", worst) + " (" + worst_case + "), " + fmt("%.1f", secs) + " s";
  }
  return o;
}

Outcome correlation_oracle() {
  Outcome o;
  using testing::random_tensor;
  const auto cases = testing::random_corr_cases(50, 2026);
  double worst = 0.0;
  int border = 0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    o.require(c.shape[0] <= 2 && c.shape[1] <= 8 && c.shape[2] <= 16 && c.shape[3] <= 16 &&
                  c.cfg.max_displacement <= 3 && c.cfg.patch_radius <= 1,
              "case " + std::to_string(ci) + " out of range");
    if (c.cfg.max_displacement * c.cfg.stride + c.cfg.patch_radius >= std::min(c.shape[2], c.shape[3])) ++border;
    auto f1 = random_tensor(c.shape, c.seed);
    auto f2 = random_tensor(c.shape, c.seed + 1);
    const auto fast = correlate(f1, f2, c.cfg);
    const auto want = testing::direct_correlation(f1, f2, c.cfg);
    if (static_cast<std::size_t>(fast.numel()) != want.size()) {
      o.require(false, "case " + std::to_string(ci) + " size mismatch");
      continue;
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst = std::max(worst, std::abs(static_cast<double>(fast.data()[i]) - want[i]));
    }
  }
  o.require(worst <= 1e-5, "oracle error " + fmt("%.3g", worst));
  o.require(border > 0, "no border cases");

  // Swapping the operands mirrors the displacement grid.
  double swap_err = 0.0;
  for (const auto& c : testing::random_corr_cases(20, 9)) {
    auto f1 = random_tensor(c.shape, c.seed);
    auto f2 = random_tensor(c.shape, c.seed + 1);
    const auto ab = correlate(f1, f2, c.cfg);
    const auto ba = correlate(f2, f1, c.cfg);
    const int r = c.cfg.grid_radius(), g = c.cfg.grid_size();
    for (int iy = 0; iy < g; ++iy) {
      for (int ix = 0; ix < g; ++ix) {
        const int dy = (iy - r) * c.cfg.stride, dx = (ix - r) * c.cfg.stride;
        const std::int64_t ch = iy * g + ix, mirrored = (g - 1 - iy) * g + (g - 1 - ix);
        for (std::int64_t n = 0; n < c.shape[0]; ++n) {
          for (std::int64_t y = 0; y < c.shape[2]; ++y) {
            for (std::int64_t x = 0; x < c.shape[3]; ++x) {
              if (y + dy < 0 || y + dy >= c.shape[2] || x + dx < 0 || x + dx >= c.shape[3]) continue;
              swap_err = std::max(swap_err, static_cast<double>(std::abs(ab.at(n, ch, y, x) -
                                                                         ba.at(n, mirrored, y + dy, x + dx))));
            }
          }
        }
      }
    }
  }
  o.require(swap_err <= 1e-5, "swap symmetry error " + fmt("%.3g", swap_err));

  double lin_err = 0.0;
  for (const auto& c : testing::random_corr_cases(20, 13)) {
    auto f1 = random_tensor(c.shape, c.seed);
    auto g1 = random_tensor(c.shape, c.seed + 1);
    auto f2 = random_tensor(c.shape, c.seed + 2);
    const float alpha = -1.75f;
    const auto base = correlate(f1, f2, c.cfg);
    const auto scaled = correlate(scale(f1, alpha), f2, c.cfg);
    const auto summed = correlate(add(f1, g1), f2, c.cfg);
    const auto other = correlate(g1, f2, c.cfg);
    const auto right = correlate(f2, add(f1, g1), c.cfg);
    const auto right_a = correlate(f2, f1, c.cfg);
    const auto right_b = correlate(f2, g1, c.cfg);
    for (std::int64_t i = 0; i < base.numel(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      lin_err = std::max({lin_err, static_cast<double>(std::abs(scaled.data()[k] - alpha * base.data()[k])),
                          static_cast<double>(std::abs(summed.data()[k] - base.data()[k] - other.data()[k])),
                          static_cast<double>(std::abs(right.data()[k] - right_a.data()[k] - right_b.data()[k]))});
    }
  }
  o.require(lin_err <= 1e-5, "bilinearity error " + fmt("%.3g", lin_err));
  if (o.pass) {
    o.detail = "50 cases (" + std::to_string(border) + " border), max error " + fmt("%.2e", worst) +
               ", swap " + fmt("%.2e", swap_err) + ", bilinear " + fmt("%.2e", lin_err);
  }
  return o;
}

Outcome loss_identities() {
  Outcome o;
  using testing::random_tensor;
  LossConfig cfg;
  o.require(cfg.lambda == 0.8f && cfg.positive_weight == 20.0f, "default constants changed");
  auto mask = [](const Shape& s, std::uint64_t seed) {
    auto t = random_tensor(s, seed, 0.0f, 1.0f);
    for (auto& v : t.mutable_data()) v = v < 0.2f ? 1.0f : 0.0f;
    return t;
  };
  const Shape s{2, 1, 48, 48};
  double comp = 0.0, term = 0.0, self = 0.0, perfect = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto wire = mask(s, seed + 1);
    auto depth = random_tensor(s, seed + 2, 3.0f, 90.0f);
    auto logits = random_tensor(s, seed + 3, -4.0f, 4.0f);
    auto pred = add(depth, random_tensor(s, seed + 4, -2.0f, 2.0f));
    const auto b = total_loss(BasicModelOutput<float>{logits, pred}, wire, depth, cfg);
    comp = std::max(comp, std::abs(b.total - (b.wire + b.depth_mae + 0.8 * b.depth_msssim)));

    // Each term, evaluated in 64 bits, against its standalone definition.
    const Shape small{1, 1, 8, 8};
    auto y = mask(small, seed + 6);
    auto z = random_tensor(small, seed + 7, -4.0f, 4.0f);
    auto gt = random_tensor(small, seed + 8, 3.0f, 90.0f);
    auto est = random_tensor(small, seed + 9, 3.0f, 90.0f);
    term = std::max(term, std::abs(wire_loss(z.cast<double>(), y.cast<double>(), 20.0).item() -
                                   testing::direct_wire_loss(z.data(), y.data(), 20.0)));
    term = std::max(term, std::abs(depth_mae(est.cast<double>(), gt.cast<double>()).item() -
                                   testing::direct_mae(est.data(), gt.data())));

    auto x = random_tensor(s, seed + 5, 0.0f, 1.0f);
    self = std::max(self, std::abs(msssim(x, x, cfg).item() - 1.0));

    auto exact = Tensor::zeros(s);
    for (std::size_t i = 0; i < wire.data().size(); ++i) {
      exact.mutable_data()[i] = wire.data()[i] > 0.5f ? 30.0f : -30.0f;
    }
    perfect = std::max(perfect, total_loss(BasicModelOutput<float>{exact, depth}, wire, depth, cfg).total);
  }
  // One positive pixel at p = 0.5 costs w+ log 2.
  const double half = wire_loss(Tensor::zeros({1, 1, 1, 1}), Tensor::full({1, 1, 1, 1}, 1.0f), 20.0f).item();
  o.require(comp <= 1e-6, "composition error " + fmt("%.3g", comp));
  o.require(term <= 1e-6, "term oracle error " + fmt("%.3g", term));
  o.require(self <= 1e-6, "msssim(x, x) off by " + fmt("%.3g", self));
  o.require(perfect < 1e-6, "perfect-prediction loss " + fmt("%.3g", perfect));
  o.require(std::abs(half - 20.0 * std::log(2.0)) <= 1e-5, "w+ log 2 case gives " + fmt("%.6f", half));
  if (o.pass) {
    o.detail = "composition " + fmt("%.2e", comp) + ", terms " + fmt("%.2e", term) + ", msssim(x,x) " + fmt("%.2e", self) + ", perfect " +
               fmt("%.2e", perfect);
  }
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  double rank_err = 0.0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto gt = random_mask(200, s, 0.15 + 0.02 * static_cast<double>(s % 10));
    auto scores = random_values(200, s + 500, 0.0f, 1.0f);
    if (s % 3 == 0) {
      for (auto& v : scores) v = std::round(v * 8.0f) / 8.0f;  // ties
    }
    const auto r = ranking_metrics(scores, gt);
    if (!r.auc || !r.ap) {
      o.require(false, "ranking metrics missing for case " + std::to_string(s));
      continue;
    }
    rank_err = std::max({rank_err, std::abs(*r.auc - testing::sweep_auc(scores, gt)),
                         std::abs(*r.ap - testing::sweep_ap(scores, gt))});
  }
  o.require(rank_err <= 1e-9, "AUC/AP sweep error " + fmt("%.3g", rank_err));

  // Hand counts: TP 1, FP 1, FN 3.
  const auto m = threshold_metrics({1, 1, 3, 10});
  o.require(m.precision == 0.5 && m.recall == 0.25 && std::abs(m.iou - 0.2) < 1e-15 &&
                std::abs(m.f1 - 1.0 / 3.0) < 1e-15,
            "hand-count metrics wrong");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pred = random_mask(200, s, 0.3), gt = random_mask(200, s + 100, 0.2);
    SegCounts want;
    for (std::size_t i = 0; i < 200; ++i) {
      want.tp += pred[i] == 1 && gt[i] == 1;
      want.fp += pred[i] == 1 && gt[i] == 0;
      want.fn += pred[i] == 0 && gt[i] == 1;
      want.tn += pred[i] == 0 && gt[i] == 0;
    }
    const auto got = seg_counts(pred, gt);
    o.require(got == want, "confusion counts differ for case " + std::to_string(s));
    const auto tm = threshold_metrics(got);
    const double p = want.tp + want.fp ? double(want.tp) / double(want.tp + want.fp) : 0.0;
    const double r = want.tp + want.fn ? double(want.tp) / double(want.tp + want.fn) : 0.0;
    const double iou = want.tp + want.fp + want.fn ? double(want.tp) / double(want.tp + want.fp + want.fn) : 0.0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    o.require(std::abs(tm.precision - p) < 1e-12 && std::abs(tm.recall - r) < 1e-12 &&
                  std::abs(tm.iou - iou) < 1e-12 && std::abs(tm.f1 - f1) < 1e-12,
              "threshold metrics differ for case " + std::to_string(s));
  }

  // abs_rel_wd: mutating non-wire pixels changes nothing, a wire pixel does.
  int mutations = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto gt = random_values(256, 11 + s, 3.0f, 40.0f);
    const auto pred = random_values(256, 40 + s, 3.0f, 40.0f);
    const auto mask = random_mask(256, 70 + s, 0.1);
    const auto before = wire_depth_abs_rel(pred, gt, mask, 16, 16);
    if (!before) continue;
    auto mutated = pred;
    const auto noise = random_values(256, 90 + s, -100.0f, 100.0f);
    for (std::size_t i = 0; i < 256; ++i) {
      if (mask[i] != 1.0f) mutated[i] += noise[i];
    }
    o.require(*wire_depth_abs_rel(mutated, gt, mask, 16, 16) == *before,
              "abs_rel_wd moved with non-wire pixels, case " + std::to_string(s));
    o.require(std::abs(*before - testing::masked_abs_rel(pred, gt, mask)) <= 1e-9,
              "abs_rel_wd differs from masked loop, case " + std::to_string(s));
    auto touched = pred;
    const auto hit = std::find(mask.begin(), mask.end(), 1.0f) - mask.begin();
    touched[static_cast<std::size_t>(hit)] += 1.0f;
    o.require(*wire_depth_abs_rel(touched, gt, mask, 16, 16) != *before,
              "abs_rel_wd ignored a wire pixel, case " + std::to_string(s));
    ++mutations;
  }
  o.require(mutations >= 5, "too few mutation cases");
  if (o.pass) {
    o.detail = "AUC/AP sweep error " + fmt("%.2e", rank_err) + " over 30 cases, counts exact, " +
               std::to_string(mutations) + " mutation cases";
  }
  return o;
}

Outcome overfit() {
  Outcome o;
  RunConfig cfg;
  TrainConfig& t = cfg.train;
  t.model.variant = Variant::kUcorrDeep;
  t.model.base_channels = 4;
  t.model.corr.max_displacement = 4;
  t.optimizer = OptimizerKind::kAdam;
  t.learning_rate = 5e-3f;
  t.lr_decay = 1.0f;
  t.batch_size = 8;
  t.augment = false;
  t.deterministic = true;
  t.epochs = 300;
  t.max_steps = 300;
  t.seed = 0;

  std::vector<Sample> samples;
  for (std::uint64_t i = 0; i < 8; ++i) samples.push_back(generate_sample(cfg.data.scene, 1000 + i));

  const auto t0 = Clock::now();
  const auto result = train_model(cfg, samples);
  const double secs = seconds_since(t0);

  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const Batch batch = make_batch(ptrs, 2);
  double final_loss = 0.0;
  {
    NoGradGuard no_grad;
    final_loss = total_loss(result.model.forward(batch.frames), batch.wire, batch.depth, t.loss).total;
  }
  const double initial = result.log.front().total;
  const auto report = evaluate_model(result.model, samples, EvalConfig{});
  const double ratio = final_loss / initial;
  const double f1 = report.f1.value_or(0.0);
  const double abs_rel = report.abs_rel.value_or(1e9);
  o.require(result.steps == 300, "ran " + std::to_string(result.steps) + " steps");
  o.require(ratio < 0.1, "loss ratio " + fmt("%.4f", ratio));
  o.require(f1 >= 0.5, "wire F1 " + fmt("%.3f", f1));
  o.require(abs_rel <= 0.25, "abs_rel " + fmt("%.3f", abs_rel));
  o.require(secs < 600.0, "runtime " + fmt("%.1f", secs) + " s");
  const std::string numbers = "loss " + fmt("%.3f", initial) + " -> " + fmt("%.3f", final_loss) + " (ratio " +
                              fmt("%.4f", ratio) + "), F1 " + fmt("%.3f", f1) + ", abs_rel " +
                              fmt("%.3f", abs_rel) + ", " + fmt("%.1f", secs) + " s";
  o.detail = o.pass ? numbers : o.detail + " [" + numbers + "]";
  return o;
}

Outcome comparative(const fs::path& work) {
  Outcome o;
  RunConfig cfg;
  cfg.data.train_flights = 30;
  cfg.data.val_flights = 5;
  cfg.data.test_flights = 5;
  cfg.data.seed = 2026;
  TrainConfig& t = cfg.train;
  t.model.base_channels = 4;
  t.model.corr.max_displacement = 4;
  t.optimizer = OptimizerKind::kAdam;
  t.batch_size = 8;
  t.epochs = 5;
  t.seed = 7;
  t.deterministic = true;

  const auto t0 = Clock::now();
  const fs::path data = work / "comparative_data";
  const fs::path out = work / "comparative_run";
  fs::remove_all(out);
  const auto summary = write_dataset(cfg.data, data, true);
  o.require(summary.flights == (std::array<int, 3>{30, 5, 5}), "unexpected flight counts");
  const auto train_set = read_dataset(data, "train", 3);
  const auto eval_set = read_dataset(data, "test", 3);
  const auto result = run_ablation(cfg, train_set, eval_set, out);

  o.require(result.reports.size() == 7, std::to_string(result.reports.size()) + " variant reports");
  std::set<std::string> names;
  for (const auto& [name, report] : result.reports) {
    names.insert(name);
    for (const auto* v : {&report.iou, &report.auc, &report.ap, &report.precision, &report.recall, &report.f1,
                          &report.abs_rel, &report.mae}) {
      o.require(v->has_value() && std::isfinite(**v), name + " has a missing metric");
    }
  }
  for (const char* v : {"ucorr_deep", "ucorr_shallow", "ucorr_pixel", "unet_1f", "unet_2f", "unet_3f",
                        "ucorr_noskip"}) {
    o.require(names.count(v) == 1, std::string("no report for ") + v);
  }
  const std::size_t rows[3] = {3, 3, 2};
  for (std::size_t i = 0; i < 3; ++i) {
    o.require(result.tables[i].rows.size() == rows[i], result.tables[i].title + " has wrong row count");
  }
  for (const char* f : {"summary.txt", "correlation_location.txt", "input_frames.txt", "skip_connections.txt"}) {
    o.require(fs::exists(out / "tables" / f), std::string("missing table ") + f);
  }
  o.require(result.summary.find("ucorr_deep vs unet_1f") != std::string::npos, "summary lacks the delta line");

  auto find = [&](const std::string& v) {
    for (const auto& [name, report] : result.reports) {
      if (name == v) return report;
    }
    return EvalReport{};
  };
  const auto deep = find("ucorr_deep"), unet = find("unet_1f");
  const auto delta = percent_delta(deep.iou, unet.iou);
  const double secs = seconds_since(t0);
  std::string direction = "IoU delta unavailable";
  if (deep.iou && unet.iou) {
    direction = "ucorr_deep IoU " + fmt("%.3f", *deep.iou) + " vs unet_1f " + fmt("%.3f", *unet.iou) +
                (delta ? " (" + fmt("%+.1f", *delta) + "%)" : std::string()) +
                (*deep.iou > *unet.iou ? ", ucorr_deep ahead" : ", ucorr_deep not ahead");
  }
  const std::string info = "7 variants, " + std::to_string(train_set.size()) + " train / " +
                           std::to_string(eval_set.size()) + " test samples, " + direction + ", " +
                           fmt("%.0f", secs) + " s";
  o.detail = o.pass ? info : o.detail + " [" + info + "]";
  return o;
}

// Centroid column of a wire's coverage.
double centroid_u(const Image& alpha) {
  double mass = 0.0, moment = 0.0;
  for (int y = 0; y < alpha.height; ++y) {
    for (int x = 0; x < alpha.width; ++x) {
      mass += alpha.at(y, x);
      moment += alpha.at(y, x) * x;
    }
  }
  return moment / mass;
}

Outcome data_pipeline(const fs::path& work) {
  Outcome o;
  // Generator determinism, in memory and on disk.
  SceneConfig scene;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sample a = generate_sample(scene, seed), b = generate_sample(scene, seed);
    o.require(a.frames == b.frames && a.wire_mask == b.wire_mask && a.depth == b.depth,
              "generate_sample not deterministic for seed " + std::to_string(seed));
  }
  DatasetConfig dc;
  dc.train_flights = 3;
  dc.val_flights = 1;
  dc.test_flights = 1;
  dc.frames_per_flight = 4;
  dc.seed = 17;
  const fs::path da = work / "pipeline_a", db = work / "pipeline_b";
  write_dataset(dc, da, true);
  write_dataset(dc, db, true);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(da)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), da);
    o.require(fs::exists(db / rel) && slurp(e.path()) == slurp(db / rel), "resampled file differs: " + rel.string());
    ++files;
  }
  o.require(files > 0, "no dataset files written");

  // Nearer wires shift further between frames, scene by scene.
  SceneConfig contained;
  contained.span_begin_min = 0.25;
  contained.span_begin_max = 0.3;
  contained.span_end_min = 0.7;
  contained.span_end_max = 0.75;
  contained.min_wires = 2;
  contained.max_wires = 3;
  int ordered_pairs = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene sc = sample_scene(contained, seed);
    const auto poses = flight_poses(contained, seed, 2);
    std::vector<std::pair<double, double>> depth_shift;
    for (std::size_t w = 0; w < sc.wires.size(); ++w) {
      depth_shift.emplace_back(sc.wires[w].depth, centroid_u(render_wire_alpha(sc, w, poses[0])) -
                                                      centroid_u(render_wire_alpha(sc, w, poses[1])));
    }
    std::sort(depth_shift.begin(), depth_shift.end());
    for (std::size_t i = 1; i < depth_shift.size(); ++i) {
      o.require(depth_shift[i - 1].second > depth_shift[i].second,
                "parallax not decreasing with depth in scene " + std::to_string(seed));
      ++ordered_pairs;
    }
  }

  // Masks and depth survive the disk round trip exactly.
  std::size_t compared = 0;
  for (const char* split : kSplits) {
    std::vector<Sample> expected;
    for (const auto& e : read_manifest(da)) {
      if (e.split != split) continue;
      for (auto& s : flight_samples(generate_flight(dc.scene, e.seed, e.frames), 2, {})) expected.push_back(s);
    }
    const auto loaded = read_dataset(da, split, 2);
    o.require(loaded.size() == expected.size(), std::string("sample count differs in ") + split);
    for (std::size_t i = 0; i < std::min(loaded.size(), expected.size()); ++i) {
      o.require(loaded[i].wire_mask == expected[i].wire_mask && loaded[i].depth == expected[i].depth,
                std::string("round trip differs in ") + split + " sample " + std::to_string(i));
      ++compared;
    }
  }

  // Augmentation: photometric transforms leave labels alone, flips move
  // labels with the frames.
  auto only = [](const std::string& name) {
    auto c = AugmentationConfig::none();
    if (name == "motion_blur") c.motion_blur = {true, 1.0, 5};
    if (name == "flip") c.flip = {true, 1.0};
    if (name == "rgb_shift") c.rgb_shift = {true, 1.0, 0.08};
    if (name == "color_jitter") c.color_jitter = {true, 1.0, 0.2, 0.2, 0.2, 0.05};
    if (name == "hue_saturation") c.hue_saturation = {true, 1.0, 0.05, 0.3};
    if (name == "invert") c.invert = {true, 1.0};
    if (name == "clahe") c.clahe = {true, 1.0, 8, 2.0};
    if (name == "brightness_contrast") c.brightness_contrast = {true, 1.0, 0.2, 0.2};
    if (name == "gamma") c.gamma = {true, 1.0, 0.8, 1.25};
    return c;
  };
  int augmented = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sample s = generate_sample(scene, 300 + seed);
    for (const char* name : {"motion_blur", "rgb_shift", "color_jitter", "hue_saturation", "invert", "clahe",
                             "brightness_contrast", "gamma"}) {
      const Sample out = augment(s, only(name), seed);
      o.require(out.wire_mask == s.wire_mask && out.depth == s.depth, std::string(name) + " changed labels");
      ++augmented;
    }
    const Sample flipped = augment(s, only("flip"), seed);
    bool mirrored = true;
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) {
        const int mx = s.width() - 1 - x;
        mirrored = mirrored && flipped.wire_mask.at(y, x) == s.wire_mask.at(y, mx) &&
                   flipped.depth.at(y, x) == s.depth.at(y, mx) &&
                   flipped.frame_curr().at(y, x, 0) == s.frame_curr().at(y, mx, 0);
      }
    }
    o.require(mirrored, "flip did not mirror labels with frames, seed " + std::to_string(seed));
    // The full default policy never changes the mask's pixel count.
    const Sample full = augment(s, AugmentationConfig{}, seed);
    o.require(std::count(full.wire_mask.data.begin(), full.wire_mask.data.end(), 1.0f) ==
                  std::count(s.wire_mask.data.begin(), s.wire_mask.data.end(), 1.0f),
              "default augmentation changed the wire pixel count");
    ++augmented;
  }
  if (o.pass) {
    o.detail = std::to_string(files) + " files byte-identical, " + std::to_string(ordered_pairs) +
               " depth-ordered wire pairs over 20 scenes, " + std::to_string(compared) + " samples round-tripped, " +
               std::to_string(augmented) + " augmentation checks";
  }
  return o;
}

Outcome training_recipe(const fs::path& work) {
  Outcome o;
  double lr_err = 0.0;
  for (int e = 0; e < 15; ++e) {
    lr_err = std::max(lr_err, std::abs(static_cast<double>(learning_rate_at_epoch(5e-3f, 0.9f, e)) -
                                       5e-3 * std::pow(0.9, e)));
  }
  o.require(lr_err <= 1e-6, "schedule error " + fmt("%.3g", lr_err));

  // The schedule the training loop actually applies: one step per epoch.
  RunConfig cfg;
  cfg.train.model.base_channels = 4;
  cfg.train.model.encoder_depth = 3;
  cfg.train.model.input_height = 48;
  cfg.train.model.input_width = 48;
  cfg.train.model.corr.max_displacement = 2;
  cfg.train.batch_size = 2;
  cfg.train.epochs = 5;
  cfg.train.deterministic = true;
  SceneConfig small;
  small.height = 48;
  small.width = 48;
  std::vector<Sample> two{generate_sample(small, 1), generate_sample(small, 2)};
  fs::remove_all(work / "recipe_run");
  const auto run = train_model(cfg, two, {work / "recipe_run", std::nullopt, 0, {}});
  double logged_err = 0.0;
  for (const auto& row : run.log) {
    logged_err = std::max(logged_err, std::abs(static_cast<double>(row.lr) - 5e-3 * std::pow(0.9, row.epoch)));
  }
  o.require(run.log.size() == 5 && logged_err <= 1e-6, "logged schedule error " + fmt("%.3g", logged_err));
  o.require(run.log.size() > 3 && std::abs(run.log[3].lr - 3.645e-3) <= 1e-6, "epoch 3 lr wrong");

  // SGD against the hand-unrolled recurrence, bit for bit.
  const float lr = 5e-3f, mu = 0.9f, wd = 0.01f;
  const auto init = random_values(16, 5, -1.0f, 1.0f);
  ParameterList<float> params{{"p", Tensor::from_data({16}, init, true)}};
  OptimizerState state(params, lr, mu, wd);
  std::vector<float> p = init, v(16, 0.0f);
  bool exact = true;
  for (int step = 0; step < 20; ++step) {
    const auto grads = random_values(16, 100 + static_cast<std::uint64_t>(step), -2.0f, 2.0f);
    std::copy(grads.begin(), grads.end(), params[0].tensor.mutable_grad().begin());
    sgd_step(params, state);
    for (std::size_t j = 0; j < 16; ++j) {
      float t = mu * v[j];
      t = t + grads[j];
      v[j] = t + wd * p[j];
      p[j] = p[j] - lr * v[j];
      exact = exact && params[0].tensor.data()[j] == p[j] && state.velocity[0][j] == v[j];
    }
  }
  o.require(exact, "SGD step differs from the hand-unrolled recurrence");
  if (o.pass) {
    o.detail = "schedule error " + fmt("%.2e", lr_err) + ", logged lr error " + fmt("%.2e", logged_err) +
               ", 20 SGD steps bit-exact";
  }
  return o;
}

}  // namespace
}  // namespace ucorr

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  CLI::App app{"ucorr acceptance checks"};
  std::vector<std::string> only;
  std::string work = (fs::temp_directory_path() / "ucorr_acceptance").string();
  app.add_option("--only", only, "Run just these criteria");
  app.add_option("--work-dir", work, "Scratch directory for datasets and runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = work;
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::function<ucorr::Outcome()>>> criteria = {
      {"gradient_suite", [] { return ucorr::gradient_suite(); }},
      {"correlation_oracle", [] { return ucorr::correlation_oracle(); }},
      {"loss_identities", [] { return ucorr::loss_identities(); }},
      {"metric_oracles", [] { return ucorr::metric_oracles(); }},
      {"overfit", [] { return ucorr::overfit(); }},
      {"comparative_experiment", [&] { return ucorr::comparative(dir); }},
      {"data_pipeline", [&] { return ucorr::data_pipeline(dir); }},
      {"training_recipe", [&] { return ucorr::training_recipe(dir); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ucorr::Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
