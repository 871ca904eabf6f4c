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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ucorr {

struct SegCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  SegCounts& operator+=(const SegCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const SegCounts&) const = default;
};

/// Exact confusion counts of two binary masks (values 0 or 1).
SegCounts seg_counts(std::span<const float> pred_mask, std::span<const float> gt_mask);

struct ThresholdMetrics {
  double iou = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  // Set when a ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
};

ThresholdMetrics threshold_metrics(const SegCounts& counts);

struct RankingMetrics {
  std::optional<double> auc;  // empty when ground truth has one class only
  std::optional<double> ap;
};

/// ROC AUC from the Mann-Whitney rank statistic with average ranks for
/// ties; AP as the step-wise area under the precision-recall curve with
/// tied scores forming a single step.
RankingMetrics ranking_metrics(std::span<const float> scores, std::span<const float> gt_mask);

struct DepthErrors {
  std::optional<double> abs_rel;
  std::optional<double> mae;
  std::int64_t pixels = 0;
};

/// Mean |pred - gt| / gt and mean |pred - gt| over pixels where the mask
/// is 1 and gt > 0 (an empty mask means all pixels).
DepthErrors depth_metrics(std::span<const float> pred, std::span<const float> gt,
                          std::span<const float> valid_mask = {});

/// Square (Chebyshev) dilation of a binary H x W mask.
std::vector<float> dilate_mask(std::span<const float> mask, int height, int width, int radius);

/// Absolute relative depth error restricted to ground-truth wire pixels
/// (after dilation by `dilation_radius`) of a single H x W image. Empty
/// when the image has no wire pixels.
std::optional<double> wire_depth_abs_rel(std::span<const float> pred, std::span<const float> gt,
                                         std::span<const float> gt_wire_mask, int height,
                                         int width, int dilation_radius = 0);

struct EvalReport {
  std::optional<double> iou, auc, ap, precision, recall, f1;
  std::optional<double> abs_rel, mae, abs_rel_wd;
  std::int64_t n_samples = 0;
  double threshold = 0.5;
  std::vector<std::string> flags;
};

/// Fixed column order of the report files.
inline constexpr const char* kReportColumns[] = {"iou",    "auc", "ap",  "precision", "recall",
                                                 "f1",     "abs_rel", "mae", "abs_rel_wd"};

/// Pools counts, scores and depth sums over images (micro-averaging);
/// wire-depth error is averaged per image over images with wires.
/// Accumulators from disjoint image sets merge associatively.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(double threshold = 0.5, int wd_dilation = 0, bool macro = false);

  /// One H x W image: wire probabilities, gt mask, predicted and gt depth.
  void add_image(std::span<const float> wire_prob, std::span<const float> gt_mask,
                 std::span<const float> pred_depth, std::span<const float> gt_depth, int height,
                 int width);
  void merge(const MetricAccumulator& other);
  EvalReport report() const;

  const SegCounts& counts() const { return counts_; }
  std::int64_t images() const { return images_; }

 private:
  double threshold_;
  int wd_dilation_;
  bool macro_;
  SegCounts counts_;
  std::vector<float> scores_;
  std::vector<float> labels_;
  double abs_rel_sum_ = 0.0;
  double abs_err_sum_ = 0.0;
  std::int64_t depth_pixels_ = 0;
  std::vector<double> wd_per_image_;
  std::vector<ThresholdMetrics> per_image_;
  std::int64_t images_ = 0;
};

/// Threshold in (0, 1) maximizing pooled F1 over the given pixels.
double f1_optimal_threshold(std::span<const float> scores, std::span<const float> gt_mask);

std::string format_report_table(const EvalReport& r, const std::string& model_name);
std::string format_report_kv(const EvalReport& r);

}  // namespace ucorr
