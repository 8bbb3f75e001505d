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

#include "bicompress/decoder.hpp"

#include <bit>

namespace bicompress {

namespace {

ConvOptions Conv(int in, int out, int kernel) {
  ConvOptions o;
  o.in_channels = in;
  o.out_channels = out;
  o.kernel_h = kernel;
  o.kernel_w = kernel;
  return o;
}

int Log2Exact(int v, const char* what) {
  Require(v > 0 && std::has_single_bit(static_cast<unsigned>(v)),
          std::string(what) + " = " + std::to_string(v) + " is not a power of two");
  return std::countr_zero(static_cast<unsigned>(v));
}

}  // namespace

std::string ToString(Branch branch) {
  switch (branch) {
    case Branch::kHdb:
      return "HDB";
    case Branch::kVdb:
      return "VDB";
    case Branch::kEb:
      return "EB";
  }
  return "?";
}

std::string HeadPrefix(Branch branch) {
  switch (branch) {
    case Branch::kHdb:
      return "head.hdb";
    case Branch::kVdb:
      return "head.vdb";
    case Branch::kEb:
      return "head.eb";
  }
  return "head.unknown";
}

DecoderConfig DecoderConfig::ForResolution(int height, int width, int in_channels, int c_d,
                                           int c_b, int n_classes) {
  DecoderConfig c;
  c.in_channels = in_channels;
  c.c_d = c_d;
  c.c_b = c_b;
  c.n_classes = n_classes;
  c.n_aconv_h = Log2Exact(height / 4, "H/4");
  c.n_aconv_v = Log2Exact(width / 4, "W/4");
  return c;
}

void DecoderConfig::Validate(int height, int width) const {
  const int want_h = Log2Exact(height / 4, "H/4");
  const int want_v = Log2Exact(width / 4, "W/4");
  Require(n_aconv_h == want_h, "n_aconv_h = " + std::to_string(n_aconv_h) +
                                   " inconsistent with H = " + std::to_string(height) +
                                   " (need " + std::to_string(want_h) + ")");
  Require(n_aconv_v == want_v, "n_aconv_v = " + std::to_string(n_aconv_v) +
                                   " inconsistent with W = " + std::to_string(width) +
                                   " (need " + std::to_string(want_v) + ")");
  Require(c_d > 0 && c_b > 0 && n_classes > 0 && in_channels > 0,
          "decoder channel counts must be positive");
}

template <typename T>
AConvDecoder<T>::AConvDecoder(ParamStore<T>& store, const std::string& name, Direction direction,
                              int in_channels, int c_d, int layers)
    : direction_(direction) {
  Require(layers >= 0, "negative A-Conv layer count");
  reduce_ = ConvBnAct<T>(store, name + ".reduce", Conv(in_channels, c_d, 1));
  for (int l = 0; l < layers; ++l) {
    layers_.emplace_back(store, name + ".aconv" + std::to_string(l + 1), Conv(c_d, c_d, 3));
  }
}

template <typename T>
DecodedFeature<T> AConvDecoder<T>::operator()(const DirectionalSequence<T>& seq,
                                              bool training) const {
  Require(seq.direction == direction_, "A-Conv decoder built for " + ToString(direction_) +
                                           " got a " + ToString(seq.direction) + " sequence");
  const Shape& s = seq.data.shape();
  const bool horizontal = direction_ == Direction::kHorizontal;
  Require(horizontal ? s.h == 1 : s.w == 1,
          "A-Conv input must have a collapsed axis of extent 1, got " + s.str());
  Var<T> x = reduce_(seq.data, training);
  for (const auto& layer : layers_) {
    const Shape& xs = x.shape();
    x = horizontal ? Upsample(x, xs.h * 2, xs.w, UpsampleMode::kNearest)
                   : Upsample(x, xs.h, xs.w * 2, UpsampleMode::kNearest);
    x = layer(x, training);
  }
  return {horizontal ? DecodedKind::kHorizontal : DecodedKind::kVertical, x};
}

template <typename T>
DecodedFeature<T> EnsembleSum(const DecodedFeature<T>& dh, const DecodedFeature<T>& dv,
                              const Var<T>& f1) {
  Require(dh.data.shape() == dv.data.shape() && dh.data.shape() == f1.shape(),
          "ensemble operands disagree: D_h " + dh.data.shape().str() + ", D_v " +
              dv.data.shape().str() + ", F_1 " + f1.shape().str());
  const std::array<Var<T>, 3> terms{dh.data, dv.data, f1};
  return {DecodedKind::kEnsemble, AddN<T>(terms)};
}

template <typename T>
BranchHead<T>::BranchHead(ParamStore<T>& store, const std::string& name, Branch branch, int c_d,
                          int c_b, int n_classes)
    : branch_(branch) {
  bottleneck_[0] = ConvBnAct<T>(store, name + ".bottleneck1", Conv(c_d, c_b, 1));
  bottleneck_[1] = ConvBnAct<T>(store, name + ".bottleneck2", Conv(c_b, c_b, 3));
  bottleneck_[2] = ConvBnAct<T>(store, name + ".bottleneck3", Conv(c_b, c_b, 1));
  seg_conv_ = ConvBnAct<T>(store, name + ".seghead.conv", Conv(c_b, c_b, 3));
  classifier_ = Conv2d<T>(store, name + ".seghead.classifier", Conv(c_b, n_classes, 1));
}

template <typename T>
BranchOutputs<T> BranchHead<T>::operator()(const DecodedFeature<T>& feature,
                                           bool training) const {
  Var<T> f = feature.data;
  for (const auto& layer : bottleneck_) f = layer(f, training);
  const Shape& s = f.shape();
  Var<T> x = Upsample(f, s.h * 2, s.w * 2, UpsampleMode::kBilinear);
  x = seg_conv_(x, training);
  x = Upsample(x, s.h * 4, s.w * 4, UpsampleMode::kBilinear);
  return {branch_, f, classifier_(x)};
}

#define BICOMPRESS_INSTANTIATE(T)                                                         \
  template class AConvDecoder<T>;                                                         \
  template class BranchHead<T>;                                                           \
  template DecodedFeature<T> EnsembleSum<T>(const DecodedFeature<T>&,                     \
                                            const DecodedFeature<T>&, const Var<T>&);

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

}  // namespace bicompress
