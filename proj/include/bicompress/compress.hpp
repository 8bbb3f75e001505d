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

#ifndef BICOMPRESS_COMPRESS_HPP_
#define BICOMPRESS_COMPRESS_HPP_

// Bi-directional compression of the feature pyramid into two 1D sequences.
//
// Each pyramid level passes through a Mix-MLP positional layer and is then
// squeezed twice by pyramid pooling compression (PPC):
//
//   horizontal: height collapsed, width kept   -> (C_s, 1, w_i)
//   vertical:   width collapsed, height kept   -> (C_s, h_i, 1)
//
// For stage i (1-based) the horizontal levels pool to 2^j x w_i bins for
// j = 0..4-i, the vertical levels to h_i x 2^j bins for j = 0..5-i. Every
// level is collapsed to extent 1 by a learned valid conv whose kernel spans
// the 2^j bins, the levels are concatenated on channels and fused by a
// 1x1 conv + batch norm + ReLU. The four stage sequences of one direction
// are then bilinearly stretched along the kept axis to the stage-1 extent
// and concatenated, giving S_eqh (4 C_s, 1, W/4) and S_eqv (4 C_s, H/4, 1).

#include <array>
#include <string>
#include <vector>

#include "bicompress/encoder.hpp"
#include "bicompress/nn.hpp"

namespace bicompress {

enum class Direction { kHorizontal, kVertical };

std::string ToString(Direction direction);

struct MixMlpConfig {
  int channels = 0;
  int expansion = 4;
};

// Linear(GELU(DWConv3x3(Linear(x)))) + x, with a zero-padded depth-wise
// conv so that border positions are distinguishable.
template <typename T>
class MixMlp {
 public:
  MixMlp() = default;
  MixMlp(ParamStore<T>& store, const std::string& name, const MixMlpConfig& config);

  Var<T> operator()(const Var<T>& x) const;

 private:
  Conv2d<T> expand_;
  Conv2d<T> depthwise_;
  Conv2d<T> project_;
};

struct PpcSchedule {
  int stage = 1;
  Direction direction = Direction::kHorizontal;
  // Bin counts along the pooled axis, coarsest first.
  std::vector<int> levels;
};

// Level schedule for stage in {1..4}.
PpcSchedule MakePpcSchedule(int stage, Direction direction);

template <typename T>
struct DirectionalSequence {
  Direction direction = Direction::kHorizontal;
  Var<T> data;

  // Extent of the axis that was not collapsed.
  int kept_extent() const {
    return direction == Direction::kHorizontal ? data.shape().w : data.shape().h;
  }
};

template <typename T>
class PpcCompress {
 public:
  PpcCompress() = default;
  PpcCompress(ParamStore<T>& store, const std::string& name, PpcSchedule schedule,
              int in_channels, int out_channels);

  DirectionalSequence<T> operator()(const Var<T>& feature, bool training) const;

  const PpcSchedule& schedule() const { return schedule_; }

 private:
  PpcSchedule schedule_;
  std::vector<Conv2d<T>> collapse_;
  ConvBnAct<T> fuse_;
};

// Stretches stages 2..4 bilinearly along the kept axis to the extent of the
// first sequence and concatenates all four on channels.
template <typename T>
DirectionalSequence<T> AlignConcat(std::span<const DirectionalSequence<T>> reps);

struct CompressionConfig {
  int in_channels = 64;   // C_fpn
  int out_channels = 64;  // C_s
  int mlp_expansion = 4;
};

template <typename T>
struct CompressedSequences {
  DirectionalSequence<T> horizontal;  // S_eqh
  DirectionalSequence<T> vertical;    // S_eqv
};

// Mix-MLP (one per stage, shared by both directions) followed by the two
// PPC paths and the per-direction alignment.
template <typename T>
class BiCompression {
 public:
  BiCompression(ParamStore<T>& store, const std::string& name, const CompressionConfig& config);

  CompressedSequences<T> operator()(const FeaturePyramid<T>& pyramid, bool training) const;

 private:
  std::array<MixMlp<T>, 4> mix_;
  std::array<PpcCompress<T>, 4> horizontal_;
  std::array<PpcCompress<T>, 4> vertical_;
};

}  // namespace bicompress

#endif  // BICOMPRESS_COMPRESS_HPP_
