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

#ifndef BICOMPRESS_NETWORK_HPP_
#define BICOMPRESS_NETWORK_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>

#include "bicompress/compress.hpp"
#include "bicompress/decoder.hpp"
#include "bicompress/encoder.hpp"

namespace bicompress {

struct NetworkConfig {
  int height = 64;
  int width = 128;
  int n_classes = 13;
  EncoderConfig encoder;
  int c_s = 0;  // 0: same as encoder.c_fpn
  int c_d = 0;  // 0: same as encoder.c_fpn
  int c_b = 32;
  int mlp_expansion = 4;

  int compressed_channels() const { return c_s > 0 ? c_s : encoder.c_fpn; }
  int decoder_channels() const { return c_d > 0 ? c_d : encoder.c_fpn; }
  void Validate() const;
};

struct ForwardOptions {
  // All three heads when true; only the ensemble head otherwise.
  bool train_heads = true;
  // Batch statistics (training) or running averages (inference).
  bool batch_stats = true;

  static ForwardOptions Train() { return {true, true}; }
  static ForwardOptions Eval() { return {false, false}; }
};

template <typename T>
struct NetworkOutputs {
  FeaturePyramid<T> pyramid;
  CompressedSequences<T> sequences;
  DecodedFeature<T> d_h;
  DecodedFeature<T> d_v;
  DecodedFeature<T> d_e;
  std::map<Branch, BranchOutputs<T>> branches;
};

// Encoder -> bi-directional compression -> A-Conv decoding -> ensemble sum
// -> per-branch heads. The student heads (HDB on D_h, VDB on D_v) are only
// evaluated when `train_heads` is set; the ensemble head (EB on D_e) always.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkConfig& config, std::uint64_t seed = 0);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  NetworkOutputs<T> Forward(const Var<T>& images, const ForwardOptions& options) const;
  NetworkOutputs<T> Forward(const Tensor<T>& images, const ForwardOptions& options) const {
    return Forward(Var<T>::Constant(images), options);
  }

  ParamStore<T>& params() { return *store_; }
  const ParamStore<T>& params() const { return *store_; }
  const NetworkConfig& config() const { return config_; }
  const Encoder<T>& encoder() const { return *encoder_; }
  const BiCompression<T>& compression() const { return *compression_; }
  const DecoderConfig& decoder_config() const { return decoder_config_; }

 private:
  NetworkConfig config_;
  DecoderConfig decoder_config_;
  std::unique_ptr<ParamStore<T>> store_;
  std::unique_ptr<Encoder<T>> encoder_;
  std::unique_ptr<BiCompression<T>> compression_;
  AConvDecoder<T> aconv_h_;
  AConvDecoder<T> aconv_v_;
  std::optional<Conv2d<T>> f1_projection_;
  std::map<Branch, BranchHead<T>> heads_;
};

}  // namespace bicompress

#endif  // BICOMPRESS_NETWORK_HPP_
