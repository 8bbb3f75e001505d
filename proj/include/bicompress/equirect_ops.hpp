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

#ifndef BICOMPRESS_EQUIRECT_OPS_HPP_
#define BICOMPRESS_EQUIRECT_OPS_HPP_

// Low-level spatial ops aware of the equirectangular layout: the horizontal
// axis is periodic (longitude wraps), the vertical axis is not.

#include "bicompress/autograd.hpp"
#include "bicompress/tensor.hpp"

namespace bicompress {

enum class HorizontalPad { kCircular, kZero };

struct PadSpec {
  int left = 0;
  int right = 0;
  int top = 0;
  int bottom = 0;

  static PadSpec Symmetric(int horizontal, int vertical) {
    return {horizontal, horizontal, vertical, vertical};
  }
  bool is_zero() const { return left == 0 && right == 0 && top == 0 && bottom == 0; }
};

enum class UpsampleMode { kNearest, kBilinear };

// Pads left/right by wrapping columns (column -1 is column w-1) and
// top/bottom with zero rows. With HorizontalPad::kZero the columns are zero
// filled instead.
template <typename T>
Tensor<T> CircularPad(const Tensor<T>& x, const PadSpec& spec,
                      HorizontalPad mode = HorizontalPad::kCircular);
template <typename T>
Var<T> CircularPad(const Var<T>& x, const PadSpec& spec,
                   HorizontalPad mode = HorizontalPad::kCircular);

// Exact non-overlapping block means: output (bins_h, bins_w) where each
// bin averages an (h/bins_h) x (w/bins_w) window.
template <typename T>
Tensor<T> WindowAvgPool(const Tensor<T>& x, int bins_h, int bins_w);
template <typename T>
Var<T> WindowAvgPool(const Var<T>& x, int bins_h, int bins_w);

// Upsampling to (out_h, out_w) with out_h >= h and out_w >= w.
//
// Nearest:  src = floor(dst * in / out).
// Bilinear: half-pixel centres, align_corners = false,
//           src = max((dst + 0.5) * in / out - 0.5, 0), edge samples clamped.
// An axis whose extent does not change is passed through exactly.
template <typename T>
Tensor<T> Upsample(const Tensor<T>& x, int out_h, int out_w, UpsampleMode mode);
template <typename T>
Var<T> Upsample(const Var<T>& x, int out_h, int out_w, UpsampleMode mode);

// Circular roll of the horizontal axis: out[.., j] = x[.., (j - shift) mod w].
template <typename T>
Tensor<T> RollHorizontal(const Tensor<T>& x, int shift);

}  // namespace bicompress

#endif  // BICOMPRESS_EQUIRECT_OPS_HPP_
