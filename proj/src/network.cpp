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

#include "bicompress/network.hpp"

namespace bicompress {

void NetworkConfig::Validate() const {
  CheckEncoderInput(height, width);
  encoder.Validate();
  Require(n_classes > 0, "n_classes must be positive");
  Require(c_b > 0, "C_b must be positive");
  Require(mlp_expansion >= 1, "Mix-MLP expansion must be >= 1");
}

template <typename T>
Network<T>::Network(const NetworkConfig& config, std::uint64_t seed)
    : config_(config), store_(std::make_unique<ParamStore<T>>(seed)) {
  config_.Validate();
  const int c_s = config_.compressed_channels();
  const int c_d = config_.decoder_channels();
  decoder_config_ = DecoderConfig::ForResolution(config_.height, config_.width, 4 * c_s, c_d,
                                                 config_.c_b, config_.n_classes);
  decoder_config_.Validate(config_.height, config_.width);

  ParamStore<T>& store = *store_;
  encoder_ = std::make_unique<Encoder<T>>(store, "encoder", config_.encoder);
  compression_ = std::make_unique<BiCompression<T>>(
      store, "compress", CompressionConfig{config_.encoder.c_fpn, c_s, config_.mlp_expansion});
  aconv_h_ = AConvDecoder<T>(store, "decoder.horizontal", Direction::kHorizontal, 4 * c_s, c_d,
                             decoder_config_.n_aconv_h);
  aconv_v_ = AConvDecoder<T>(store, "decoder.vertical", Direction::kVertical, 4 * c_s, c_d,
                             decoder_config_.n_aconv_v);
  if (config_.encoder.c_fpn != c_d) {
    ConvOptions o;
    o.in_channels = config_.encoder.c_fpn;
    o.out_channels = c_d;
    f1_projection_.emplace(store, "decoder.f1_projection", o);
  }
  for (Branch b : kAllBranches) {
    heads_.emplace(b, BranchHead<T>(store, HeadPrefix(b), b, c_d, config_.c_b,
                                    config_.n_classes));
  }
}

template <typename T>
NetworkOutputs<T> Network<T>::Forward(const Var<T>& images, const ForwardOptions& options) const {
  const Shape& s = images.shape();
  Require(s.h == config_.height && s.w == config_.width,
          "network built for " + std::to_string(config_.height) + "x" +
              std::to_string(config_.width) + " got input " + s.str());
  const bool bn = options.batch_stats;
  NetworkOutputs<T> out;
  out.pyramid = (*encoder_)(images, bn);
  out.sequences = (*compression_)(out.pyramid, bn);
  out.d_h = aconv_h_(out.sequences.horizontal, bn);
  out.d_v = aconv_v_(out.sequences.vertical, bn);
  Var<T> f1 = out.pyramid.levels[0];
  if (f1_projection_) f1 = (*f1_projection_)(f1);
  out.d_e = EnsembleSum(out.d_h, out.d_v, f1);

  // Heads are evaluated in a fixed order; the EB head never reads student state.
  if (options.train_heads) {
    out.branches.emplace(Branch::kHdb, heads_.at(Branch::kHdb)(out.d_h, bn));
    out.branches.emplace(Branch::kVdb, heads_.at(Branch::kVdb)(out.d_v, bn));
  }
  out.branches.emplace(Branch::kEb, heads_.at(Branch::kEb)(out.d_e, bn));
  return out;
}

template class Network<float>;
template class Network<double>;

}  // namespace bicompress
