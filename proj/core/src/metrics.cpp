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

#include "ucorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ucorr {
namespace {

void require_binary(std::span<const float> mask, const char* what) {
  for (float v : mask) {
    if (v != 0.0f && v != 1.0f) throw std::invalid_argument(std::string(what) + " must be binary");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": size mismatch " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

double ratio(std::int64_t num, std::int64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(const std::optional<double>& v, int precision = 4) {
  if (!v) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

}  // namespace

SegCounts seg_counts(std::span<const float> pred_mask, std::span<const float> gt_mask) {
  require_same_size(pred_mask.size(), gt_mask.size(), "seg_counts");
  require_binary(pred_mask, "prediction mask");
  require_binary(gt_mask, "ground-truth mask");
  SegCounts c;
  for (std::size_t i = 0; i < gt_mask.size(); ++i) {
    const bool p = pred_mask[i] != 0.0f;
    const bool g = gt_mask[i] != 0.0f;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ThresholdMetrics threshold_metrics(const SegCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) {
    throw std::invalid_argument("threshold_metrics: negative count");
  }
  ThresholdMetrics m;
  m.iou = ratio(c.tp, c.tp + c.fp + c.fn, m.degenerate);
  m.precision = ratio(c.tp, c.tp + c.fp, m.degenerate);
  m.recall = ratio(c.tp, c.tp + c.fn, m.degenerate);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.degenerate = true;
  }
  return m;
}

RankingMetrics ranking_metrics(std::span<const float> scores, std::span<const float> gt_mask) {
  require_same_size(scores.size(), gt_mask.size(), "ranking_metrics");
  require_binary(gt_mask, "ground-truth mask");
  const std::size_t n = scores.size();
  std::int64_t positives = 0;
  for (float g : gt_mask) positives += g != 0.0f;
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) return {};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ascending pass: average ranks for the Mann-Whitney statistic.
  long double pos_rank_sum = 0.0L;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::int64_t group_pos = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) group_pos += gt_mask[order[j++]] != 0.0f;
    const long double avg_rank = (static_cast<long double>(i + 1) + static_cast<long double>(j)) / 2.0L;
    pos_rank_sum += avg_rank * static_cast<long double>(group_pos);
    i = j;
  }
  const long double p = static_cast<long double>(positives);
  const long double u = pos_rank_sum - p * (p + 1.0L) / 2.0L;
  RankingMetrics out;
  out.auc = static_cast<double>(u / (p * static_cast<long double>(negatives)));

  // Descending pass: one precision-recall step per distinct score.
  long double ap = 0.0L;
  std::int64_t tp = 0, seen = 0;
  for (std::size_t i = n; i > 0;) {
    std::size_t j = i;
    std::int64_t group_pos = 0;
    while (j > 0 && scores[order[j - 1]] == scores[order[i - 1]]) {
      group_pos += gt_mask[order[j - 1]] != 0.0f;
      --j;
    }
    tp += group_pos;
    seen += static_cast<std::int64_t>(i - j);
    if (group_pos > 0) {
      ap += (static_cast<long double>(group_pos) / p) *
            (static_cast<long double>(tp) / static_cast<long double>(seen));
    }
    i = j;
  }
  out.ap = static_cast<double>(ap);
  return out;
}

DepthErrors depth_metrics(std::span<const float> pred, std::span<const float> gt,
                          std::span<const float> valid_mask) {
  require_same_size(pred.size(), gt.size(), "depth_metrics");
  if (!valid_mask.empty()) require_same_size(valid_mask.size(), gt.size(), "depth_metrics mask");
  double rel = 0.0, abs_err = 0.0;
  DepthErrors out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!valid_mask.empty() && valid_mask[i] == 0.0f) continue;
    if (!(gt[i] > 0.0f) || !std::isfinite(gt[i])) continue;
    const double err = std::abs(static_cast<double>(pred[i]) - static_cast<double>(gt[i]));
    rel += err / gt[i];
    abs_err += err;
    ++out.pixels;
  }
  if (out.pixels > 0) {
    out.abs_rel = rel / static_cast<double>(out.pixels);
    out.mae = abs_err / static_cast<double>(out.pixels);
  }
  return out;
}

std::vector<float> dilate_mask(std::span<const float> mask, int height, int width, int radius) {
  require_same_size(mask.size(), static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                    "dilate_mask");
  if (radius <= 0) return {mask.begin(), mask.end()};
  std::vector<float> out(mask.size(), 0.0f);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (mask[static_cast<std::size_t>(y * width + x)] == 0.0f) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(height - 1, y + radius); ++yy) {
        for (int xx = std::max(0, x - radius); xx <= std::min(width - 1, x + radius); ++xx) {
          out[static_cast<std::size_t>(yy * width + xx)] = 1.0f;
        }
      }
    }
  }
  return out;
}

std::optional<double> wire_depth_abs_rel(std::span<const float> pred, std::span<const float> gt,
                                         std::span<const float> gt_wire_mask, int height,
                                         int width, int dilation_radius) {
  require_binary(gt_wire_mask, "wire mask");
  const auto region = dilate_mask(gt_wire_mask, height, width, dilation_radius);
  const auto errors = depth_metrics(pred, gt, region);
  if (errors.pixels == 0) return std::nullopt;
  return errors.abs_rel;
}

MetricAccumulator::MetricAccumulator(double threshold, int wd_dilation, bool macro)
    : threshold_(threshold), wd_dilation_(wd_dilation), macro_(macro) {}

void MetricAccumulator::add_image(std::span<const float> wire_prob, std::span<const float> gt_mask,
                                  std::span<const float> pred_depth,
                                  std::span<const float> gt_depth, int height, int width) {
  const auto n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  require_same_size(wire_prob.size(), n, "wire probabilities");
  require_same_size(gt_mask.size(), n, "wire mask");
  require_same_size(pred_depth.size(), n, "predicted depth");
  require_same_size(gt_depth.size(), n, "ground-truth depth");
  std::vector<float> binarized(n);
  for (std::size_t i = 0; i < n; ++i) {
    binarized[i] = wire_prob[i] >= threshold_ ? 1.0f : 0.0f;
  }
  const SegCounts c = seg_counts(binarized, gt_mask);
  counts_ += c;
  per_image_.push_back(threshold_metrics(c));
  scores_.insert(scores_.end(), wire_prob.begin(), wire_prob.end());
  labels_.insert(labels_.end(), gt_mask.begin(), gt_mask.end());

  for (std::size_t i = 0; i < n; ++i) {
    if (!(gt_depth[i] > 0.0f) || !std::isfinite(gt_depth[i])) continue;
    const double err = std::abs(static_cast<double>(pred_depth[i]) - static_cast<double>(gt_depth[i]));
    abs_rel_sum_ += err / gt_depth[i];
    abs_err_sum_ += err;
    ++depth_pixels_;
  }
  if (auto wd = wire_depth_abs_rel(pred_depth, gt_depth, gt_mask, height, width, wd_dilation_)) {
    wd_per_image_.push_back(*wd);
  }
  ++images_;
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  counts_ += other.counts_;
  scores_.insert(scores_.end(), other.scores_.begin(), other.scores_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  abs_rel_sum_ += other.abs_rel_sum_;
  abs_err_sum_ += other.abs_err_sum_;
  depth_pixels_ += other.depth_pixels_;
  wd_per_image_.insert(wd_per_image_.end(), other.wd_per_image_.begin(), other.wd_per_image_.end());
  per_image_.insert(per_image_.end(), other.per_image_.begin(), other.per_image_.end());
  images_ += other.images_;
}

EvalReport MetricAccumulator::report() const {
  EvalReport r;
  r.n_samples = images_;
  r.threshold = threshold_;
  ThresholdMetrics t = threshold_metrics(counts_);
  if (macro_ && !per_image_.empty()) {
    ThresholdMetrics avg;
    for (const auto& m : per_image_) {
      avg.iou += m.iou;
      avg.precision += m.precision;
      avg.recall += m.recall;
      avg.f1 += m.f1;
      avg.degenerate = avg.degenerate || m.degenerate;
    }
    const auto k = static_cast<double>(per_image_.size());
    avg.iou /= k;
    avg.precision /= k;
    avg.recall /= k;
    avg.f1 /= k;
    t = avg;
    r.flags.push_back("macro_averaged");
  }
  r.iou = t.iou;
  r.precision = t.precision;
  r.recall = t.recall;
  r.f1 = t.f1;
  if (counts_.tp + counts_.fp == 0) r.flags.push_back("precision_degenerate");
  if (counts_.tp + counts_.fn == 0) r.flags.push_back("recall_degenerate");
  if (counts_.tp + counts_.fp + counts_.fn == 0) r.flags.push_back("iou_degenerate");
  if (t.precision + t.recall == 0.0) r.flags.push_back("f1_degenerate");

  const auto ranking = ranking_metrics(scores_, labels_);
  r.auc = ranking.auc;
  r.ap = ranking.ap;
  if (!ranking.auc) r.flags.push_back("ranking_single_class");

  if (depth_pixels_ > 0) {
    r.abs_rel = abs_rel_sum_ / static_cast<double>(depth_pixels_);
    r.mae = abs_err_sum_ / static_cast<double>(depth_pixels_);
  } else {
    r.flags.push_back("depth_no_valid_pixels");
  }
  if (!wd_per_image_.empty()) {
    r.abs_rel_wd = std::accumulate(wd_per_image_.begin(), wd_per_image_.end(), 0.0) /
                   static_cast<double>(wd_per_image_.size());
  } else {
    r.flags.push_back("no_wire_pixels");
  }
  return r;
}

double f1_optimal_threshold(std::span<const float> scores, std::span<const float> gt_mask) {
  require_same_size(scores.size(), gt_mask.size(), "f1_optimal_threshold");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::int64_t positives = 0;
  for (float g : gt_mask) positives += g != 0.0f;
  double best_f1 = -1.0, best_t = 0.5;
  std::int64_t tp = 0, predicted = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += gt_mask[order[j]] != 0.0f;
      ++predicted;
      ++j;
    }
    const double denom = static_cast<double>(predicted + positives);
    const double f1 = denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = scores[order[i]];
    }
    i = j;
  }
  return best_t;
}

std::string format_report_table(const EvalReport& r, const std::string& model_name) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %10s %8s %8s\n", "model", "iou", "auc", "ap",
                "precision", "recall", "f1");
  out << line;
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %10s %8s %8s\n", model_name.c_str(),
                fmt(r.iou, 3).c_str(), fmt(r.auc, 3).c_str(), fmt(r.ap, 3).c_str(),
                fmt(r.precision, 3).c_str(), fmt(r.recall, 3).c_str(), fmt(r.f1, 3).c_str());
  out << line << "\n";
  std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", "model", "abs_rel", "mae", "abs_rel_wd");
  out << line;
  std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", model_name.c_str(),
                fmt(r.abs_rel, 3).c_str(), fmt(r.mae, 3).c_str(), fmt(r.abs_rel_wd, 3).c_str());
  out << line;
  out << "samples: " << r.n_samples << "  threshold: " << r.threshold << "\n";
  if (!r.flags.empty()) {
    out << "flags:";
    for (const auto& f : r.flags) out << " " << f;
    out << "\n";
  }
  return out.str();
}

std::string format_report_kv(const EvalReport& r) {
  const std::optional<double> values[] = {r.iou,    r.auc, r.ap,  r.precision, r.recall,
                                          r.f1,     r.abs_rel, r.mae, r.abs_rel_wd};
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kReportColumns); ++i) {
    out << kReportColumns[i] << " = " << fmt(values[i], 9) << "\n";
  }
  out << "n_samples = " << r.n_samples << "\n";
  out << "threshold = " << r.threshold << "\n";
  out << "flags = ";
  for (std::size_t i = 0; i < r.flags.size(); ++i) out << (i ? "," : "") << r.flags[i];
  out << "\n";
  return out.str();
}

}  // namespace ucorr
