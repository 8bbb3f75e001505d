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

#include "bicompress/encoder.hpp"

namespace bicompress {

namespace {

ConvOptions Conv(int in, int out, int kernel, int stride = 1) {
  ConvOptions o;
  o.in_channels = in;
  o.out_channels = out;
  o.kernel_h = kernel;
  o.kernel_w = kernel;
  o.stride = stride;
  return o;
}

}  // namespace

std::string ToString(EncoderVariant variant) {
  return variant == EncoderVariant::kSmallResidualUnet ? "small-residual-unet"
                                                       : "deep-resnet-style";
}

EncoderVariant ParseEncoderVariant(const std::string& name) {
  if (name == "small-residual-unet") return EncoderVariant::kSmallResidualUnet;
  if (name == "deep-resnet-style") return EncoderVariant::kDeepResnet;
  throw InvalidArgument("unknown encoder variant '" + name + "'");
}

void EncoderConfig::Validate() const {
  Require(c_fpn > 0, "C_fpn must be positive");
  Require(input_channels == 3 || input_channels == 4, "input channels must be 3 or 4");
}

void CheckEncoderInput(int height, int width) {
  Require(height > 0 && height % 32 == 0,
          "image height " + std::to_string(height) + " must be divisible by 32");
  Require(width == 2 * height, "W must equal 2H (got " + std::to_string(height) + "x" +
                                   std::to_string(width) + ")");
}

template <typename T>
SmallResidualBackbone<T>::SmallResidualBackbone(ParamStore<T>& store, const std::string& name,
                                                const EncoderConfig& config)
    : widths_(config.widths) {
  stem_ = ConvBnAct<T>(store, name + ".stem", Conv(config.input_channels, config.stem_channels, 3, 2));
  int in = config.stem_channels;
  for (int i = 0; i < 4; ++i) {
    const std::string prefix = name + ".stage" + std::to_string(i + 1);
    const int out = config.widths[i];
    stages_.push_back(Stage{
        ConvBnAct<T>(store, prefix + ".conv1", Conv(in, out, 3, 2)),
        ConvBnAct<T>(store, prefix + ".conv2", Conv(out, out, 3), /*relu=*/false),
        ConvBnAct<T>(store, prefix + ".shortcut", Conv(in, out, 1, 2), /*relu=*/false)});
    in = out;
  }
}

template <typename T>
std::array<Var<T>, 4> SmallResidualBackbone<T>::operator()(const Var<T>& image,
                                                           bool training) const {
  Var<T> x = stem_(image, training);
  std::array<Var<T>, 4> out;
  for (int i = 0; i < 4; ++i) {
    const Stage& s = stages_[i];
    Var<T> main = s.conv2(s.conv1(x, training), training);
    x = Relu(Add(main, s.shortcut(x, training)));
    out[i] = x;
  }
  return out;
}

template <typename T>
DeepResnetBackbone<T>::DeepResnetBackbone(ParamStore<T>& store, const std::string& name,
                                          const EncoderConfig& config) {
  stem_ = ConvBnAct<T>(store, name + ".stem", Conv(config.input_channels, 64, 7, 2));
  pool_ = ConvBnAct<T>(store, name + ".pool", Conv(64, 64, 3, 2));
  int in = 64;
  for (int i = 0; i < 4; ++i) {
    const int mid = config.deep_mid_widths[i];
    const int out = 4 * mid;
    out_channels_[i] = out;
    Require(config.deep_blocks[i] >= 1, "deep encoder needs at least one block per stage");
    for (int b = 0; b < config.deep_blocks[i]; ++b) {
      const std::string prefix =
          name + ".stage" + std::to_string(i + 1) + ".block" + std::to_string(b);
      const int stride = (b == 0 && i > 0) ? 2 : 1;
      Block block{ConvBnAct<T>(store, prefix + ".reduce", Conv(in, mid, 1)),
                  ConvBnAct<T>(store, prefix + ".spatial", Conv(mid, mid, 3, stride)),
                  ConvBnAct<T>(store, prefix + ".expand", Conv(mid, out, 1), false),
                  false,
                  {}};
      if (b == 0) {
        block.has_projection = true;
        block.projection =
            ConvBnAct<T>(store, prefix + ".projection", Conv(in, out, 1, stride), false);
      }
      stages_[i].push_back(std::move(block));
      in = out;
    }
  }
}

template <typename T>
std::array<Var<T>, 4> DeepResnetBackbone<T>::operator()(const Var<T>& image,
                                                        bool training) const {
  Var<T> x = pool_(stem_(image, training), training);
  std::array<Var<T>, 4> out;
  for (int i = 0; i < 4; ++i) {
    for (const Block& b : stages_[i]) {
      Var<T> main = b.expand(b.spatial(b.reduce(x, training), training), training);
      Var<T> skip = b.has_projection ? b.projection(x, training) : x;
      x = Relu(Add(main, skip));
    }
    out[i] = x;
  }
  return out;
}

template <typename T>
Encoder<T>::Encoder(ParamStore<T>& store, const std::string& name, const EncoderConfig& config)
    : config_(config) {
  config_.Validate();
  if (config.variant == EncoderVariant::kSmallResidualUnet) {
    backbone_ = std::make_unique<SmallResidualBackbone<T>>(store, name + ".backbone", config);
  } else {
    backbone_ = std::make_unique<DeepResnetBackbone<T>>(store, name + ".backbone", config);
  }
  BuildFusion(store, name);
}

template <typename T>
Encoder<T>::Encoder(ParamStore<T>& store, const std::string& name, const EncoderConfig& config,
                    std::unique_ptr<PyramidBackbone<T>> backbone)
    : config_(config), backbone_(std::move(backbone)) {
  config_.Validate();
  Require(backbone_ != nullptr, "null backbone");
  BuildFusion(store, name);
}

template <typename T>
void Encoder<T>::BuildFusion(ParamStore<T>& store, const std::string& name) {
  const auto channels = backbone_->channels();
  for (int i = 0; i < 4; ++i) {
    const std::string level = std::to_string(i + 1);
    lateral_[i] = Conv2d<T>(store, name + ".fpn.lateral" + level,
                            Conv(channels[i], config_.c_fpn, 1));
    smooth_[i] = Conv2d<T>(store, name + ".fpn.smooth" + level,
                           Conv(config_.c_fpn, config_.c_fpn, 3));
  }
}

template <typename T>
FeaturePyramid<T> Encoder<T>::operator()(const Var<T>& image, bool training) const {
  CheckEncoderInput(image.shape().h, image.shape().w);
  Require(image.shape().c == config_.input_channels,
          "encoder expects " + std::to_string(config_.input_channels) +
              " input channels, got " + image.shape().str());
  const auto features = (*backbone_)(image, training);
  const int height = image.shape().h;
  for (int i = 0; i < 4; ++i) {
    const int stride = 4 << i;
    Require(features[i].shape().h == height / stride &&
                features[i].shape().w == 2 * height / stride,
            "backbone level " + std::to_string(i + 1) + " has shape " +
                features[i].shape().str() + ", expected stride " + std::to_string(stride));
  }
  std::array<Var<T>, 4> merged;
  merged[3] = lateral_[3](features[3]);
  for (int i = 2; i >= 0; --i) {
    const Shape& s = features[i].shape();
    merged[i] = Add(lateral_[i](features[i]),
                    Upsample(merged[i + 1], s.h, s.w, UpsampleMode::kNearest));
  }
  FeaturePyramid<T> pyramid;
  for (int i = 0; i < 4; ++i) pyramid.levels[i] = smooth_[i](merged[i]);
  return pyramid;
}

template class SmallResidualBackbone<float>;
template class SmallResidualBackbone<double>;
template class DeepResnetBackbone<float>;
template class DeepResnetBackbone<double>;
template class Encoder<float>;
template class Encoder<double>;

}  // namespace bicompress
