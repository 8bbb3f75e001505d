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

#include "bicompress/compress.hpp"

namespace bicompress {

std::string ToString(Direction direction) {
  return direction == Direction::kHorizontal ? "horizontal" : "vertical";
}

template <typename T>
MixMlp<T>::MixMlp(ParamStore<T>& store, const std::string& name, const MixMlpConfig& config) {
  Require(config.channels > 0, "Mix-MLP needs positive channels");
  Require(config.expansion >= 1, "Mix-MLP expansion must be >= 1");
  const int wide = config.channels * config.expansion;
  ConvOptions fc;
  fc.in_channels = config.channels;
  fc.out_channels = wide;
  expand_ = Conv2d<T>(store, name + ".fc1", fc);

  ConvOptions dw;
  dw.in_channels = wide;
  dw.out_channels = wide;
  dw.kernel_h = 3;
  dw.kernel_w = 3;
  dw.depthwise = true;
  dw.horizontal = HorizontalPad::kZero;
  depthwise_ = Conv2d<T>(store, name + ".dwconv", dw);

  fc.in_channels = wide;
  fc.out_channels = config.channels;
  project_ = Conv2d<T>(store, name + ".fc2", fc);
}

template <typename T>
Var<T> MixMlp<T>::operator()(const Var<T>& x) const {
  return Add(project_(Gelu(depthwise_(expand_(x)))), x);
}

PpcSchedule MakePpcSchedule(int stage, Direction direction) {
  Require(stage >= 1 && stage <= 4, "PPC stage must be in 1..4, got " + std::to_string(stage));
  PpcSchedule s;
  s.stage = stage;
  s.direction = direction;
  const int last = direction == Direction::kHorizontal ? 4 - stage : 5 - stage;
  for (int j = 0; j <= last; ++j) s.levels.push_back(1 << j);
  return s;
}

template <typename T>
PpcCompress<T>::PpcCompress(ParamStore<T>& store, const std::string& name, PpcSchedule schedule,
                            int in_channels, int out_channels)
    : schedule_(std::move(schedule)) {
  Require(!schedule_.levels.empty(), "PPC schedule without levels");
  const bool horizontal = schedule_.direction == Direction::kHorizontal;
  for (int bins : schedule_.levels) {
    ConvOptions o;
    o.in_channels = in_channels;
    o.out_channels = in_channels;
    o.kernel_h = horizontal ? bins : 1;
    o.kernel_w = horizontal ? 1 : bins;
    o.same_padding = false;
    collapse_.emplace_back(store, name + ".level" + std::to_string(bins), o);
  }
  ConvOptions f;
  f.in_channels = in_channels * static_cast<int>(schedule_.levels.size());
  f.out_channels = out_channels;
  fuse_ = ConvBnAct<T>(store, name + ".fuse", f);
}

template <typename T>
DirectionalSequence<T> PpcCompress<T>::operator()(const Var<T>& feature, bool training) const {
  const Shape& s = feature.shape();
  const bool horizontal = schedule_.direction == Direction::kHorizontal;
  const int pooled_extent = horizontal ? s.h : s.w;
  std::vector<Var<T>> rows;
  rows.reserve(collapse_.size());
  for (std::size_t l = 0; l < collapse_.size(); ++l) {
    const int bins = schedule_.levels[l];
    Require(bins <= pooled_extent, "PPC bin count " + std::to_string(bins) +
                                       " exceeds pooled extent " + std::to_string(pooled_extent));
    Var<T> pooled = horizontal ? WindowAvgPool(feature, bins, s.w)
                               : WindowAvgPool(feature, s.h, bins);
    rows.push_back(collapse_[l](pooled));
  }
  Var<T> fused = fuse_(ConcatChannels<T>(rows), training);
  return {schedule_.direction, fused};
}

template <typename T>
DirectionalSequence<T> AlignConcat(std::span<const DirectionalSequence<T>> reps) {
  Require(!reps.empty(), "AlignConcat of nothing");
  const Direction d = reps.front().direction;
  const int target = reps.front().kept_extent();
  std::vector<Var<T>> aligned;
  for (const auto& r : reps) {
    Require(r.direction == d, "AlignConcat direction mismatch: " + ToString(r.direction) +
                                  " vs " + ToString(d));
    const Shape& s = r.data.shape();
    if (d == Direction::kHorizontal) {
      Require(s.h == 1, "horizontal sequence must have height 1, got " + s.str());
      aligned.push_back(Upsample(r.data, 1, target, UpsampleMode::kBilinear));
    } else {
      Require(s.w == 1, "vertical sequence must have width 1, got " + s.str());
      aligned.push_back(Upsample(r.data, target, 1, UpsampleMode::kBilinear));
    }
  }
  return {d, ConcatChannels<T>(aligned)};
}

template <typename T>
BiCompression<T>::BiCompression(ParamStore<T>& store, const std::string& name,
                                const CompressionConfig& config) {
  for (int i = 0; i < 4; ++i) {
    const std::string stage = name + ".stage" + std::to_string(i + 1);
    mix_[i] = MixMlp<T>(store, stage + ".mix_mlp", {config.in_channels, config.mlp_expansion});
    horizontal_[i] = PpcCompress<T>(store, stage + ".ppc_h",
                                    MakePpcSchedule(i + 1, Direction::kHorizontal),
                                    config.in_channels, config.out_channels);
    vertical_[i] = PpcCompress<T>(store, stage + ".ppc_v",
                                  MakePpcSchedule(i + 1, Direction::kVertical),
                                  config.in_channels, config.out_channels);
  }
}

template <typename T>
CompressedSequences<T> BiCompression<T>::operator()(const FeaturePyramid<T>& pyramid,
                                                    bool training) const {
  std::array<DirectionalSequence<T>, 4> h, v;
  for (int i = 0; i < 4; ++i) {
    Var<T> mixed = mix_[i](pyramid.levels[i]);
    h[i] = horizontal_[i](mixed, training);
    v[i] = vertical_[i](mixed, training);
  }
  return {AlignConcat<T>(h), AlignConcat<T>(v)};
}

#define BICOMPRESS_INSTANTIATE(T)                                                        \
  template class MixMlp<T>;                                                              \
  template class PpcCompress<T>;                                                         \
  template class BiCompression<T>;                                                       \
  template DirectionalSequence<T> AlignConcat<T>(std::span<const DirectionalSequence<T>>);

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

}  // namespace bicompress
