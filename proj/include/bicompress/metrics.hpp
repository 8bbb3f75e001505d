/* Copyright 2026 The Bicompress Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BICOMPRESS_METRICS_HPP_
#define BICOMPRESS_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bicompress/labels.hpp"

namespace bicompress {

// Rows are ground truth, columns are predictions. IGNORE pixels are skipped.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes);

  void Accumulate(const LabelMap& prediction, const LabelMap& labels);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::int64_t at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * n_classes_ + predicted];
  }
  std::int64_t& at(int truth, int predicted) {
    return counts_[static_cast<std::size_t>(truth) * n_classes_ + predicted];
  }
  int n_classes() const { return n_classes_; }
  std::int64_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int n_classes_;
  std::vector<std::int64_t> counts_;
};

struct ClassMetric {
  double iou = 0;
  double acc = 0;
  std::int64_t gt_pixels = 0;
  bool present = false;
};

struct SegmentationMetrics {
  double miou = 0;
  double macc = 0;
  std::vector<ClassMetric> per_class;
};

// IoU_c = TP / (TP + FP + FN), Acc_c = TP / (TP + FN); classes without
// ground-truth pixels are left out of both means.
SegmentationMetrics MiouMacc(const ConfusionMatrix& cm);

struct FoldResult {
  double miou = 0;
  double macc = 0;
};

// Unweighted mean over exactly three folds.
FoldResult AggregateFolds(std::span<const FoldResult> folds);

// Per-class CSV: class_id,class_name,iou,acc,gt_pixels,present.
std::string MetricsCsv(const SegmentationMetrics& metrics,
                       std::span<const std::string> class_names);
// {"miou", "macc", "per_class": [...], "fold"}.
nlohmann::json MetricsJson(const SegmentationMetrics& metrics,
                           std::span<const std::string> class_names, int fold);

}  // namespace bicompress

#endif  // BICOMPRESS_METRICS_HPP_
