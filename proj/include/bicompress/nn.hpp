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

#ifndef BICOMPRESS_NN_HPP_
#define BICOMPRESS_NN_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include "bicompress/autograd.hpp"
#include "bicompress/equirect_ops.hpp"
#include "bicompress/tensor.hpp"

namespace bicompress {

// Named trainable tensors plus non-trainable buffers (batch-norm running
// statistics). Names are dotted paths, e.g. "encoder.stage1.conv1.weight".
template <typename T>
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : rng_(seed) {}

  Var<T> AddParam(const std::string& name, Tensor<T> init);
  Tensor<T>& AddBuffer(const std::string& name, Tensor<T> init);

  Var<T>& param(const std::string& name);
  const Var<T>& param(const std::string& name) const;
  Tensor<T>& buffer(const std::string& name);
  bool has_param(const std::string& name) const { return params_.count(name) != 0; }

  std::map<std::string, Var<T>>& params() { return params_; }
  const std::map<std::string, Var<T>>& params() const { return params_; }
  std::map<std::string, Tensor<T>>& buffers() { return buffers_; }
  const std::map<std::string, Tensor<T>>& buffers() const { return buffers_; }

  void ZeroGrad();
  std::mt19937_64& rng() { return rng_; }

 private:
  std::map<std::string, Var<T>> params_;
  std::map<std::string, Tensor<T>> buffers_;
  std::mt19937_64 rng_;
};

// Total number of scalar parameters (buffers excluded).
template <typename T>
std::int64_t CountParameters(const ParamStore<T>& store);

// Worker threads of the matrix kernels; 1 gives a fixed reduction order.
void SetNumericThreads(int threads);

// Valid (unpadded) cross-correlation. weight is (Cout, Cin, kh, kw); bias is
// (1, Cout, 1, 1) or undefined.
template <typename T>
Var<T> Conv2dValid(const Var<T>& x, const Var<T>& weight, const Var<T>* bias,
                   int stride_h, int stride_w);

// Valid depth-wise cross-correlation; weight is (C, 1, kh, kw).
template <typename T>
Var<T> DepthwiseConv2dValid(const Var<T>& x, const Var<T>& weight, const Var<T>* bias);

struct ConvOptions {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  // "Same" padding for odd kernels: (k-1)/2 on each side.
  bool same_padding = true;
  HorizontalPad horizontal = HorizontalPad::kCircular;
  bool bias = true;
  bool depthwise = false;
};

// Convolution with equirectangular padding: circular left/right and zero
// top/bottom unless options say otherwise.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamStore<T>& store, const std::string& name, const ConvOptions& options);

  Var<T> operator()(const Var<T>& x) const;

  const ConvOptions& options() const { return options_; }
  const std::string& name() const { return name_; }

 private:
  ConvOptions options_;
  std::string name_;
  Var<T> weight_;
  Var<T> bias_;
};

// Per-channel batch normalization. In training mode it normalizes with batch
// statistics and updates the running averages (momentum 0.1, unbiased
// variance); in inference mode it uses the running averages.
template <typename T>
class BatchNorm2d {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm2d() = default;
  BatchNorm2d(ParamStore<T>& store, const std::string& name, int channels);

  Var<T> operator()(const Var<T>& x, bool training) const;

 private:
  int channels_ = 0;
  Var<T> gamma_;
  Var<T> beta_;
  Tensor<T>* running_mean_ = nullptr;
  Tensor<T>* running_var_ = nullptr;
};

// conv -> batch norm -> optional ReLU, the workhorse block of the network.
template <typename T>
class ConvBnAct {
 public:
  ConvBnAct() = default;
  ConvBnAct(ParamStore<T>& store, const std::string& name, ConvOptions options,
            bool relu = true);

  Var<T> operator()(const Var<T>& x, bool training) const;

 private:
  Conv2d<T> conv_;
  BatchNorm2d<T> bn_;
  bool relu_ = true;
};

}  // namespace bicompress

#endif  // BICOMPRESS_NN_HPP_
