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

#include "bicompress/metrics.hpp"

#include <fmt/format.h>

#include <numeric>

namespace bicompress {

ConfusionMatrix::ConfusionMatrix(int n_classes)
    : n_classes_(n_classes), counts_(static_cast<std::size_t>(n_classes) * n_classes, 0) {
  Require(n_classes > 0, "confusion matrix needs at least one class");
}

void ConfusionMatrix::Accumulate(const LabelMap& prediction, const LabelMap& labels) {
  Require(prediction.height == labels.height && prediction.width == labels.width,
          "prediction and label rasters differ in size");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int32_t p = prediction.data[i];
    Require(p >= 0 && p < n_classes_, "prediction " + std::to_string(p) + " out of range");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int32_t g = labels.data[i];
    if (g == kIgnoreLabel) continue;
    Require(g >= 0 && g < n_classes_, "label " + std::to_string(g) + " out of range");
    ++at(g, prediction.data[i]);
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  Require(other.n_classes_ == n_classes_, "confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

SegmentationMetrics MiouMacc(const ConfusionMatrix& cm) {
  Require(cm.total() > 0, "metrics of an empty confusion matrix");
  const int k = cm.n_classes();
  SegmentationMetrics m;
  m.per_class.resize(k);
  int present = 0;
  for (int c = 0; c < k; ++c) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const std::int64_t tp = cm.at(c, c);
    ClassMetric& pc = m.per_class[c];
    pc.gt_pixels = row;
    pc.present = row > 0;
    if (!pc.present) continue;
    pc.iou = static_cast<double>(tp) / static_cast<double>(row + col - tp);
    pc.acc = static_cast<double>(tp) / static_cast<double>(row);
    m.miou += pc.iou;
    m.macc += pc.acc;
    ++present;
  }
  m.miou /= present;
  m.macc /= present;
  return m;
}

FoldResult AggregateFolds(std::span<const FoldResult> folds) {
  Require(folds.size() == 3, "fold aggregation needs exactly 3 folds, got " +
                                 std::to_string(folds.size()));
  FoldResult r;
  for (const auto& f : folds) {
    r.miou += f.miou;
    r.macc += f.macc;
  }
  r.miou /= 3.0;
  r.macc /= 3.0;
  return r;
}

namespace {

std::string ClassName(std::span<const std::string> names, int c) {
  return c < static_cast<int>(names.size()) ? names[c] : "class_" + std::to_string(c);
}

}  // namespace

std::string MetricsCsv(const SegmentationMetrics& metrics,
                       std::span<const std::string> class_names) {
  std::string out = "class_id,class_name,iou,acc,gt_pixels,present\n";
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const auto& pc = metrics.per_class[c];
    out += fmt::format("{},{},{:.6f},{:.6f},{},{}\n", c, ClassName(class_names, c), pc.iou,
                       pc.acc, pc.gt_pixels, pc.present ? 1 : 0);
  }
  return out;
}

nlohmann::json MetricsJson(const SegmentationMetrics& metrics,
                           std::span<const std::string> class_names, int fold) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const auto& pc = metrics.per_class[c];
    per_class.push_back({{"class_id", c},
                         {"class_name", ClassName(class_names, static_cast<int>(c))},
                         {"iou", pc.iou},
                         {"acc", pc.acc},
                         {"gt_pixels", pc.gt_pixels},
                         {"present", pc.present}});
  }
  return {{"miou", metrics.miou}, {"macc", metrics.macc}, {"per_class", per_class},
          {"fold", fold}};
}

}  // namespace bicompress
