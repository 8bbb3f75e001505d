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

#include <opencv2/imgproc.hpp>

#include "bicompress/equirect_ops.hpp"
#include "bicompress/nn.hpp"
#include "test_util.hpp"

namespace bicompress {
namespace {

using testing::GradientError;
using testing::RandomTensor;

// padded[i][j] = x[i - top][(j - left) mod w] inside the vertical extent, 0 outside.
Tensor<double> PadOracle(const Tensor<double>& x, const PadSpec& p, bool circular) {
  Tensor<double> out({x.n(), x.c(), x.h() + p.top + p.bottom, x.w() + p.left + p.right});
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int i = 0; i < out.h(); ++i)
        for (int j = 0; j < out.w(); ++j) {
          const int si = i - p.top;
          const int sj = j - p.left;
          if (si < 0 || si >= x.h()) continue;
          if (sj < 0 || sj >= x.w()) {
            if (!circular) continue;
            out.at(n, c, i, j) = x.at(n, c, si, ((sj % x.w()) + x.w()) % x.w());
          } else {
            out.at(n, c, i, j) = x.at(n, c, si, sj);
          }
        }
  return out;
}

TEST(EquirectOps, CircularPadMatchesOracle) {
  const Tensor<double> x = RandomTensor<double>({2, 3, 4, 6}, 1);
  const PadSpec spec{2, 1, 1, 3};
  EXPECT_EQ(MaxAbsDiff(CircularPad(x, spec), PadOracle(x, spec, true)), 0.0);
  EXPECT_EQ(MaxAbsDiff(CircularPad(x, spec, HorizontalPad::kZero), PadOracle(x, spec, false)),
            0.0);
}

TEST(EquirectOps, CircularPadWrapsSeamColumns) {
  Tensor<float> x({1, 1, 1, 4}, std::vector<float>{1, 2, 3, 4});
  const Tensor<float> y = CircularPad(x, PadSpec::Symmetric(1, 0));
  EXPECT_EQ(y.vec(), (std::vector<float>{4, 1, 2, 3, 4, 1}));
}

TEST(EquirectOps, CircularPadRejectsPadWiderThanImage) {
  const Tensor<float> x({1, 1, 2, 3});
  EXPECT_THROW(CircularPad(x, PadSpec::Symmetric(3, 0)), InvalidArgument);
}

TEST(EquirectOps, WindowAvgPoolMatchesBruteForce) {
  const Tensor<double> x = RandomTensor<double>({2, 2, 8, 12}, 2);
  const Tensor<double> y = WindowAvgPool(x, 4, 3);
  ASSERT_EQ(y.shape(), (Shape{2, 2, 4, 3}));
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 2; ++c)
      for (int bi = 0; bi < 4; ++bi)
        for (int bj = 0; bj < 3; ++bj) {
          double s = 0;
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) s += x.at(n, c, bi * 2 + i, bj * 4 + j);
          EXPECT_NEAR(y.at(n, c, bi, bj), s / 8, 1e-14);
        }
}

TEST(EquirectOps, WindowAvgPoolRejectsUnevenBins) {
  const Tensor<float> x({1, 1, 6, 8});
  EXPECT_THROW(WindowAvgPool(x, 4, 8), InvalidArgument);
  EXPECT_THROW(WindowAvgPool(x, 12, 8), InvalidArgument);
}

TEST(EquirectOps, NearestUpsampleReplicates) {
  Tensor<float> x({1, 1, 1, 3}, std::vector<float>{1, 2, 3});
  const Tensor<float> y = Upsample(x, 2, 6, UpsampleMode::kNearest);
  EXPECT_EQ(y.vec(), (std::vector<float>{1, 1, 2, 2, 3, 3, 1, 1, 2, 2, 3, 3}));
}

TEST(EquirectOps, BilinearUpsampleMatchesOpenCv) {
  const Tensor<float> x = RandomTensor<float>({1, 1, 5, 7}, 3);
  const Tensor<float> y = Upsample(x, 10, 28, UpsampleMode::kBilinear);
  cv::Mat src(5, 7, CV_32F, const_cast<float*>(x.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(28, 10), 0, 0, cv::INTER_LINEAR);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 28; ++j) EXPECT_NEAR(y.at(0, 0, i, j), dst.at<float>(i, j), 1e-5);
}

TEST(EquirectOps, UnchangedAxisPassesThrough) {
  const Tensor<double> x = RandomTensor<double>({1, 2, 1, 5}, 4);
  const Tensor<double> y = Upsample(x, 1, 15, UpsampleMode::kBilinear);
  const Tensor<double> z = Upsample(x, 4, 5, UpsampleMode::kBilinear);
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 4; ++i) EXPECT_EQ(z.at(0, c, i, j), x.at(0, c, 0, j));
  EXPECT_EQ(y.shape(), (Shape{1, 2, 1, 15}));
  EXPECT_THROW(Upsample(x, 1, 4, UpsampleMode::kBilinear), InvalidArgument);
}

TEST(EquirectOps, RollHorizontalIsInvertible) {
  const Tensor<float> x = RandomTensor<float>({1, 2, 3, 8}, 5);
  const Tensor<float> y = RollHorizontal(x, 3);
  EXPECT_EQ(y.at(0, 1, 2, 3), x.at(0, 1, 2, 0));
  EXPECT_EQ(RollHorizontal(y, -3).vec(), x.vec());
  EXPECT_EQ(RollHorizontal(x, 8).vec(), x.vec());
}

TEST(EquirectOps, GradientsMatchFiniteDifferences) {
  const Tensor<double> x = RandomTensor<double>({1, 2, 4, 6}, 6);
  const Tensor<double> wp = RandomTensor<double>({1, 2, 7, 9}, 7);
  EXPECT_LT(GradientError(
                [&](const Var<double>& v) { return WeightedSum(CircularPad(v, {2, 1, 1, 2}), wp); },
                x),
            1e-8);
  const Tensor<double> wa = RandomTensor<double>({1, 2, 2, 3}, 8);
  EXPECT_LT(GradientError([&](const Var<double>& v) { return WeightedSum(WindowAvgPool(v, 2, 3), wa); },
                          x),
            1e-8);
  const Tensor<double> wu = RandomTensor<double>({1, 2, 8, 18}, 9);
  for (auto mode : {UpsampleMode::kNearest, UpsampleMode::kBilinear}) {
    EXPECT_LT(GradientError([&](const Var<double>& v) { return WeightedSum(Upsample(v, 8, 18, mode), wu); },
                            x),
              1e-8);
  }
}

// A stride-1 circular convolution commutes with horizontal rolls.
TEST(EquirectOps, CircularConvCommutesWithRoll) {
  ParamStore<double> store(3);
  ConvOptions o;
  o.in_channels = 2;
  o.out_channels = 3;
  o.kernel_h = 3;
  o.kernel_w = 3;
  Conv2d<double> conv(store, "conv", o);
  const Tensor<double> x = RandomTensor<double>({1, 2, 5, 10}, 10);
  const Tensor<double> a = conv(Var<double>::Constant(RollHorizontal(x, 4))).value();
  const Tensor<double> b = RollHorizontal(conv(Var<double>::Constant(x)).value(), 4);
  EXPECT_LT(MaxAbsDiff(a, b), 1e-12);
}

}  // namespace
}  // namespace bicompress
