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

#ifndef BICOMPRESS_DECODER_HPP_
#define BICOMPRESS_DECODER_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bicompress/compress.hpp"
#include "bicompress/nn.hpp"

namespace bicompress {

enum class Branch { kHdb, kVdb, kEb };

inline constexpr std::array<Branch, 3> kAllBranches{Branch::kHdb, Branch::kVdb, Branch::kEb};
inline constexpr std::array<Branch, 2> kStudentBranches{Branch::kHdb, Branch::kVdb};

std::string ToString(Branch branch);

enum class DecodedKind { kHorizontal, kVertical, kEnsemble };

// D_h, D_v or D_e, each (C_d, H/4, W/4).
template <typename T>
struct DecodedFeature {
  DecodedKind kind = DecodedKind::kEnsemble;
  Var<T> data;
};

template <typename T>
struct BranchOutputs {
  Branch branch = Branch::kEb;
  Var<T> bottleneck;  // f: (C_b, H/4, W/4)
  Var<T> logits;      // (N_cls, H, W); softmax gives p
};

struct DecoderConfig {
  int in_channels = 256;  // 4 * C_s, channels of S_eqh / S_eqv
  int c_d = 64;
  int c_b = 32;
  int n_aconv_h = 4;
  int n_aconv_v = 5;
  int n_classes = 13;

  // n_aconv_h = log2(H/4), n_aconv_v = log2(W/4).
  static DecoderConfig ForResolution(int height, int width, int in_channels, int c_d, int c_b,
                                     int n_classes);
  void Validate(int height, int width) const;
};

// 1x1 reduce to C_d, then n A-Conv layers each doubling the collapsed axis:
// nearest x2 upsample along that axis only, 3x3 conv (circular left/right,
// zero top/bottom), batch norm, ReLU.
template <typename T>
class AConvDecoder {
 public:
  AConvDecoder() = default;
  AConvDecoder(ParamStore<T>& store, const std::string& name, Direction direction,
               int in_channels, int c_d, int layers);

  DecodedFeature<T> operator()(const DirectionalSequence<T>& seq, bool training) const;
  int layers() const { return static_cast<int>(layers_.size()); }

 private:
  Direction direction_ = Direction::kHorizontal;
  ConvBnAct<T> reduce_;
  std::vector<ConvBnAct<T>> layers_;
};

// D_e = D_h + D_v + F_1 (element-wise).
template <typename T>
DecodedFeature<T> EnsembleSum(const DecodedFeature<T>& dh, const DecodedFeature<T>& dv,
                              const Var<T>& f1);

// Bottleneck (1x1 -> 3x3 -> 1x1, each BN + ReLU) then SegHead (bilinear x2,
// 3x3 conv + BN + ReLU, bilinear x2, 1x1 conv to class logits).
template <typename T>
class BranchHead {
 public:
  BranchHead() = default;
  BranchHead(ParamStore<T>& store, const std::string& name, Branch branch, int c_d, int c_b,
             int n_classes);

  BranchOutputs<T> operator()(const DecodedFeature<T>& feature, bool training) const;

  // Name of the last 1x1 classifier conv (for inspection and tests).
  const std::string& classifier_name() const { return classifier_.name(); }

 private:
  Branch branch_ = Branch::kEb;
  std::array<ConvBnAct<T>, 3> bottleneck_;
  ConvBnAct<T> seg_conv_;
  Conv2d<T> classifier_;
};

// Parameter-name prefix of each branch head.
std::string HeadPrefix(Branch branch);

}  // namespace bicompress

#endif  // BICOMPRESS_DECODER_HPP_
