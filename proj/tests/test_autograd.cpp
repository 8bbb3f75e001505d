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

#include "bicompress/autograd.hpp"
#include "test_util.hpp"

namespace bicompress {
namespace {

using testing::GradientError;
using testing::RandomTensor;

TEST(Autograd, AddScaleSumGradient) {
  const Tensor<double> b = RandomTensor<double>({2, 3, 2, 2}, 2);
  auto f = [&](const Var<double>& x) {
    return SumAll(Scale(Add(x, Var<double>::Constant(b)), 3.0));
  };
  EXPECT_LT(GradientError(f, RandomTensor<double>({2, 3, 2, 2}, 1)), 1e-8);
}

TEST(Autograd, ReluGeluWeightedSumGradient) {
  const Tensor<double> w = RandomTensor<double>({1, 2, 3, 3}, 4);
  auto f = [&](const Var<double>& x) {
    return WeightedSum(Add(Relu(x), Gelu(x)), w);
  };
  // Values bounded away from the ReLU kink.
  Tensor<double> x = RandomTensor<double>({1, 2, 3, 3}, 3);
  for (auto& v : x.vec()) v += v > 0 ? 0.1 : -0.1;
  EXPECT_LT(GradientError(f, x), 1e-7);
}

TEST(Autograd, GeluMatchesErfDefinition) {
  Tensor<double> x({1, 1, 1, 5}, std::vector<double>{-2, -0.5, 0, 0.5, 2});
  const Var<double> y = Gelu(Var<double>::Constant(x));
  for (int i = 0; i < 5; ++i) {
    const double v = x[i];
    EXPECT_NEAR(y.value()[i], 0.5 * v * (1 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
}

TEST(Autograd, ConcatChannelsRoutesGradient) {
  const Tensor<double> other = RandomTensor<double>({2, 1, 2, 3}, 5);
  const Tensor<double> w = RandomTensor<double>({2, 3, 2, 3}, 6);
  auto f = [&](const Var<double>& x) {
    std::vector<Var<double>> parts{Var<double>::Constant(other), x};
    return WeightedSum(ConcatChannels<double>(parts), w);
  };
  EXPECT_LT(GradientError(f, RandomTensor<double>({2, 2, 2, 3}, 7)), 1e-8);
}

TEST(Autograd, LinearCombinationAndAddN) {
  auto f = [](const Var<double>& x) {
    std::vector<Var<double>> terms{SumAll(x), SumAll(Scale(x, 2.0)), SumAll(Relu(x))};
    const std::vector<double> k{0.5, -1.0, 2.0};
    std::vector<Var<double>> sum{x, x};
    return Add(LinearCombination<double>(terms, k), SumAll(AddN<double>(sum)));
  };
  Tensor<double> x = RandomTensor<double>({1, 1, 2, 2}, 8);
  for (auto& v : x.vec()) v += v > 0 ? 0.1 : -0.1;
  EXPECT_LT(GradientError(f, x), 1e-8);
}

TEST(Autograd, GradientsAccumulateUntilZeroGrad) {
  Var<double> p = Var<double>::Parameter(Tensor<double>({1, 1, 1, 2}, 1.0));
  Backward(SumAll(p));
  Backward(SumAll(Scale(p, 2.0)));
  EXPECT_DOUBLE_EQ(p.grad()[0], 3.0);
  p.ZeroGrad();
  EXPECT_FALSE(p.has_grad());
}

TEST(Autograd, NoGradGuardAndDetachCutTheGraph) {
  Var<double> p = Var<double>::Parameter(Tensor<double>({1, 1, 1, 1}, 2.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(GradEnabled());
    EXPECT_FALSE(Scale(p, 2.0).requires_grad());
  }
  EXPECT_TRUE(GradEnabled());
  EXPECT_FALSE(Detach(p).requires_grad());
  Backward(Add(SumAll(Detach(p)), SumAll(p)));
  EXPECT_DOUBLE_EQ(p.grad()[0], 1.0);
}

TEST(Autograd, DiamondGraphVisitsSharedNodeOnce) {
  Var<double> p = Var<double>::Parameter(Tensor<double>({1, 1, 1, 1}, 1.5));
  Var<double> shared = Scale(p, 2.0);
  Backward(SumAll(Add(shared, shared)));
  EXPECT_DOUBLE_EQ(p.grad()[0], 4.0);
}

}  // namespace
}  // namespace bicompress
