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

#include <gtest/gtest.h>

#include "bicompress/metrics.hpp"
#include "test_util.hpp"

namespace bicompress {
namespace {

using testing::RandomLabels;

TEST(Metrics, ConfusionRowsAreTruth) {
  LabelMap gt(1, 4), pred(1, 4);
  gt.data = {0, 0, 1, kIgnoreLabel};
  pred.data = {0, 1, 1, 0};
  ConfusionMatrix cm(2);
  cm.Accumulate(pred, gt);
  EXPECT_EQ(cm.at(0, 0), 1);
  EXPECT_EQ(cm.at(0, 1), 1);
  EXPECT_EQ(cm.at(1, 1), 1);
  EXPECT_EQ(cm.at(1, 0), 0);
  EXPECT_EQ(cm.total(), 3);
}

TEST(Metrics, PerfectPredictionScoresOne) {
  const LabelMap gt = RandomLabels(8, 16, 5, 1);
  ConfusionMatrix cm(5);
  cm.Accumulate(gt, gt);
  const auto m = MiouMacc(cm);
  EXPECT_DOUBLE_EQ(m.miou, 1.0);
  EXPECT_DOUBLE_EQ(m.macc, 1.0);
}

TEST(Metrics, AbsentClassesExcludedFromMeans) {
  LabelMap gt(1, 4, 0), pred(1, 4, 0);
  gt.data = {0, 0, 1, 1};
  pred.data = {0, 2, 1, 1};
  ConfusionMatrix cm(3);
  cm.Accumulate(pred, gt);
  const auto m = MiouMacc(cm);
  EXPECT_FALSE(m.per_class[2].present);
  EXPECT_DOUBLE_EQ(m.per_class[0].iou, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[0].acc, 0.5);
  EXPECT_DOUBLE_EQ(m.miou, 0.75);
  EXPECT_DOUBLE_EQ(m.macc, 0.75);
}

TEST(Metrics, DegeneratePredictorScoresOnlyItsClass) {
  LabelMap gt(1, 4), pred(1, 4, 0);
  gt.data = {0, 0, 1, 2};
  ConfusionMatrix cm(3);
  cm.Accumulate(pred, gt);
  const auto m = MiouMacc(cm);
  EXPECT_DOUBLE_EQ(m.per_class[0].acc, 1.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].acc, 0.0);
  EXPECT_DOUBLE_EQ(m.per_class[2].acc, 0.0);
  EXPECT_DOUBLE_EQ(m.per_class[0].iou, 0.5);
}

TEST(Metrics, ErrorsOnBadInput) {
  ConfusionMatrix cm(2);
  EXPECT_THROW(MiouMacc(cm), InvalidArgument);
  LabelMap gt(1, 2, 0), pred(1, 2, 2);
  EXPECT_THROW(cm.Accumulate(pred, gt), InvalidArgument);
  EXPECT_THROW(cm.Accumulate(LabelMap(1, 3, 0), gt), InvalidArgument);
  EXPECT_THROW(ConfusionMatrix(2) += ConfusionMatrix(3), InvalidArgument);
}

TEST(Metrics, AccumulationIsAdditive) {
  ConfusionMatrix a(4), b(4), ab(4);
  const LabelMap g1 = RandomLabels(4, 8, 4, 1, 0.1), p1 = RandomLabels(4, 8, 4, 2);
  const LabelMap g2 = RandomLabels(4, 8, 4, 3, 0.1), p2 = RandomLabels(4, 8, 4, 4);
  a.Accumulate(p1, g1);
  b.Accumulate(p2, g2);
  ab.Accumulate(p1, g1);
  ab.Accumulate(p2, g2);
  a += b;
  EXPECT_EQ(a, ab);
}

TEST(Metrics, AggregateNeedsThreeFolds) {
  const std::vector<FoldResult> two{{0.1, 0.2}, {0.3, 0.4}};
  EXPECT_THROW(AggregateFolds(two), InvalidArgument);
  const std::vector<FoldResult> three{{0.3, 0.6}, {0.6, 0.3}, {0.9, 0.0}};
  const FoldResult r = AggregateFolds(three);
  EXPECT_NEAR(r.miou, 0.6, 1e-15);
  EXPECT_NEAR(r.macc, 0.3, 1e-15);
}

TEST(Metrics, CsvAndJsonReports) {
  LabelMap gt(1, 2, 0), pred(1, 2, 0);
  gt.data = {0, 1};
  ConfusionMatrix cm(2);
  cm.Accumulate(pred, gt);
  const auto m = MiouMacc(cm);
  const std::vector<std::string> names{"beam", "board"};
  const std::string csv = MetricsCsv(m, names);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class_id,class_name,iou,acc,gt_pixels,present");
  EXPECT_NE(csv.find("0,beam,0.500000,1.000000,1,1"), std::string::npos);
  const auto j = MetricsJson(m, names, 2);
  EXPECT_EQ(j["fold"], 2);
  EXPECT_EQ(j["per_class"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["miou"].get<double>(), m.miou);
}

}  // namespace
}  // namespace bicompress
