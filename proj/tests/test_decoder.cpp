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

#include "bicompress/decoder.hpp"
#include "test_util.hpp"

namespace bicompress {
namespace {

using testing::RandomTensor;

TEST(Decoder, LayerCountsFollowResolution) {
  const auto low = DecoderConfig::ForResolution(64, 128, 256, 64, 32, 13);
  EXPECT_EQ(low.n_aconv_h, 4);
  EXPECT_EQ(low.n_aconv_v, 5);
  const auto mid = DecoderConfig::ForResolution(256, 512, 256, 64, 32, 13);
  EXPECT_EQ(mid.n_aconv_h, 6);
  EXPECT_EQ(mid.n_aconv_v, 7);
  DecoderConfig bad = low;
  bad.n_aconv_h = 5;
  EXPECT_THROW(bad.Validate(64, 128), InvalidArgument);
  EXPECT_NO_THROW(low.Validate(64, 128));
}

TEST(Decoder, AConvRestoresCollapsedAxis) {
  ParamStore<float> store(1);
  AConvDecoder<float> dh(store, "dh", Direction::kHorizontal, 12, 8, 4);
  AConvDecoder<float> dv(store, "dv", Direction::kVertical, 12, 8, 5);
  const auto h = dh({Direction::kHorizontal, Var<float>::Constant(RandomTensor<float>({2, 12, 1, 32}, 1))}, true);
  const auto v = dv({Direction::kVertical, Var<float>::Constant(RandomTensor<float>({2, 12, 16, 1}, 2))}, true);
  EXPECT_EQ(h.data.shape(), (Shape{2, 8, 16, 32}));
  EXPECT_EQ(v.data.shape(), (Shape{2, 8, 16, 32}));
  EXPECT_EQ(h.kind, DecodedKind::kHorizontal);
  EXPECT_EQ(v.kind, DecodedKind::kVertical);
  EXPECT_EQ(dh.layers(), 4);
}

TEST(Decoder, EnsembleIsElementwiseSum) {
  const Tensor<float> a = RandomTensor<float>({1, 2, 3, 4}, 3);
  const Tensor<float> b = RandomTensor<float>({1, 2, 3, 4}, 4);
  const Tensor<float> c = RandomTensor<float>({1, 2, 3, 4}, 5);
  const auto e = EnsembleSum<float>({DecodedKind::kHorizontal, Var<float>::Constant(a)},
                                    {DecodedKind::kVertical, Var<float>::Constant(b)},
                                    Var<float>::Constant(c));
  EXPECT_EQ(e.kind, DecodedKind::kEnsemble);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(e.data.value()[i], a[i] + b[i] + c[i]);
  EXPECT_THROW(EnsembleSum<float>({DecodedKind::kHorizontal, Var<float>::Constant(a)},
                                  {DecodedKind::kVertical, Var<float>::Constant(b)},
                                  Var<float>::Constant(Tensor<float>({1, 2, 3, 5}))),
               InvalidArgument);
}

TEST(Decoder, BranchHeadShapesAndNames) {
  ParamStore<float> store(2);
  BranchHead<float> head(store, HeadPrefix(Branch::kVdb), Branch::kVdb, 8, 4, 13);
  const auto out = head({DecodedKind::kVertical, Var<float>::Constant(RandomTensor<float>({2, 8, 16, 32}, 6))}, true);
  EXPECT_EQ(out.branch, Branch::kVdb);
  EXPECT_EQ(out.bottleneck.shape(), (Shape{2, 4, 16, 32}));
  EXPECT_EQ(out.logits.shape(), (Shape{2, 13, 64, 128}));
  EXPECT_EQ(head.classifier_name(), "head.vdb.seghead.classifier");
  EXPECT_TRUE(store.has_param("head.vdb.seghead.classifier.bias"));
  EXPECT_EQ(ToString(Branch::kHdb), "HDB");
  EXPECT_EQ(ToString(Branch::kEb), "EB");
}

}  // namespace
}  // namespace bicompress
