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

#ifndef BICOMPRESS_ENCODER_HPP_
#define BICOMPRESS_ENCODER_HPP_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "bicompress/nn.hpp"

namespace bicompress {

enum class EncoderVariant { kSmallResidualUnet, kDeepResnet };

std::string ToString(EncoderVariant variant);
EncoderVariant ParseEncoderVariant(const std::string& name);

struct EncoderConfig {
  EncoderVariant variant = EncoderVariant::kSmallResidualUnet;
  int c_fpn = 64;
  int input_channels = 4;
  // Small encoder.
  int stem_channels = 16;
  std::array<int, 4> widths{32, 64, 128, 256};
  // Deep encoder: bottleneck blocks per stage (ResNet-101 layout by default)
  // and bottleneck mid widths; stage outputs are 4x the mid width.
  std::array<int, 4> deep_blocks{3, 4, 23, 3};
  std::array<int, 4> deep_mid_widths{64, 128, 256, 512};

  void Validate() const;
};

// Four maps at strides {4, 8, 16, 32}, all with c_fpn channels.
template <typename T>
struct FeaturePyramid {
  std::array<Var<T>, 4> levels;
};

// Anything producing four feature maps at strides 4, 8, 16 and 32. A
// pretrained deep network can be plugged in by implementing this.
template <typename T>
class PyramidBackbone {
 public:
  virtual ~PyramidBackbone() = default;
  virtual std::array<Var<T>, 4> operator()(const Var<T>& image, bool training) const = 0;
  virtual std::array<int, 4> channels() const = 0;
};

// Stem (stride 2) followed by four stride-2 residual stages.
template <typename T>
class SmallResidualBackbone : public PyramidBackbone<T> {
 public:
  SmallResidualBackbone(ParamStore<T>& store, const std::string& name,
                        const EncoderConfig& config);
  std::array<Var<T>, 4> operator()(const Var<T>& image, bool training) const override;
  std::array<int, 4> channels() const override { return widths_; }

 private:
  struct Stage {
    ConvBnAct<T> conv1;
    ConvBnAct<T> conv2;
    ConvBnAct<T> shortcut;
  };
  ConvBnAct<T> stem_;
  std::vector<Stage> stages_;
  std::array<int, 4> widths_;
};

// ResNet-style bottleneck backbone: 7x7 stride-2 stem, a stride-2 3x3 conv in
// place of max pooling, then four stages of 1x1-3x3-1x1 bottleneck blocks.
template <typename T>
class DeepResnetBackbone : public PyramidBackbone<T> {
 public:
  DeepResnetBackbone(ParamStore<T>& store, const std::string& name,
                     const EncoderConfig& config);
  std::array<Var<T>, 4> operator()(const Var<T>& image, bool training) const override;
  std::array<int, 4> channels() const override { return out_channels_; }

 private:
  struct Block {
    ConvBnAct<T> reduce;
    ConvBnAct<T> spatial;
    ConvBnAct<T> expand;
    bool has_projection = false;
    ConvBnAct<T> projection;
  };
  ConvBnAct<T> stem_;
  ConvBnAct<T> pool_;
  std::array<std::vector<Block>, 4> stages_;
  std::array<int, 4> out_channels_;
};

// Backbone + pyramid fusion: 1x1 laterals to c_fpn, top-down nearest x2
// additions, then a 3x3 smoothing conv per level.
template <typename T>
class Encoder {
 public:
  Encoder(ParamStore<T>& store, const std::string& name, const EncoderConfig& config);
  Encoder(ParamStore<T>& store, const std::string& name, const EncoderConfig& config,
          std::unique_ptr<PyramidBackbone<T>> backbone);

  FeaturePyramid<T> operator()(const Var<T>& image, bool training) const;
  const EncoderConfig& config() const { return config_; }

 private:
  void BuildFusion(ParamStore<T>& store, const std::string& name);

  EncoderConfig config_;
  std::unique_ptr<PyramidBackbone<T>> backbone_;
  std::array<Conv2d<T>, 4> lateral_;
  std::array<Conv2d<T>, 4> smooth_;
};

// Validates image geometry for extraction: H divisible by 32 and W = 2H.
void CheckEncoderInput(int height, int width);

}  // namespace bicompress

#endif  // BICOMPRESS_ENCODER_HPP_
