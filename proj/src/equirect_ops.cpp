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

#include "bicompress/equirect_ops.hpp"

#include <cmath>
#include <string>

namespace bicompress {

namespace {

void CheckPad(const Shape& s, const PadSpec& spec, HorizontalPad mode) {
  Require(spec.left >= 0 && spec.right >= 0 && spec.top >= 0 && spec.bottom >= 0,
          "padding must be non-negative");
  if (mode == HorizontalPad::kCircular) {
    Require(spec.left < s.w && spec.right < s.w,
            "circular padding (" + std::to_string(spec.left) + "," +
                std::to_string(spec.right) + ") must be smaller than width " +
                std::to_string(s.w));
  }
}

// Source column for padded column `j`, or -1 for a zero column.
inline int SourceColumn(int j, int left, int w, HorizontalPad mode) {
  int src = j - left;
  if (src >= 0 && src < w) return src;
  if (mode == HorizontalPad::kZero) return -1;
  return ((src % w) + w) % w;
}

struct AxisTap {
  int i0;
  int i1;
  double w0;
  double w1;
};

std::vector<AxisTap> AxisTable(int in, int out, UpsampleMode mode) {
  std::vector<AxisTap> taps(out);
  for (int d = 0; d < out; ++d) {
    if (in == out) {
      taps[d] = {d, d, 1.0, 0.0};
    } else if (mode == UpsampleMode::kNearest) {
      const int s = std::min(static_cast<int>((static_cast<long long>(d) * in) / out), in - 1);
      taps[d] = {s, s, 1.0, 0.0};
    } else {
      double src = (d + 0.5) * static_cast<double>(in) / out - 0.5;
      if (src < 0) src = 0;
      int i0 = static_cast<int>(std::floor(src));
      if (i0 > in - 1) i0 = in - 1;
      const int i1 = std::min(i0 + 1, in - 1);
      const double l = src - i0;
      taps[d] = {i0, i1, 1.0 - l, l};
    }
  }
  return taps;
}

template <typename T>
void PadBackward(const Tensor<T>& grad_out, Tensor<T>& grad_in, const PadSpec& spec,
                 HorizontalPad mode) {
  const Shape& s = grad_in.shape();
  const int ow = grad_out.w();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int i = 0; i < s.h; ++i) {
        const T* src = grad_out.plane(n, c) + static_cast<std::size_t>(i + spec.top) * ow;
        T* dst = grad_in.plane(n, c) + static_cast<std::size_t>(i) * s.w;
        for (int j = 0; j < ow; ++j) {
          const int col = SourceColumn(j, spec.left, s.w, mode);
          if (col >= 0) dst[col] += src[j];
        }
      }
    }
  }
}

template <typename T>
void PoolBackward(const Tensor<T>& grad_out, Tensor<T>& grad_in) {
  const Shape& s = grad_in.shape();
  const int bh = grad_out.h(), bw = grad_out.w();
  const int wh = s.h / bh, ww = s.w / bw;
  const T inv = T(1) / static_cast<T>(wh * ww);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* g = grad_out.plane(n, c);
      T* dst = grad_in.plane(n, c);
      for (int i = 0; i < s.h; ++i) {
        for (int j = 0; j < s.w; ++j) {
          dst[static_cast<std::size_t>(i) * s.w + j] += g[(i / wh) * bw + j / ww] * inv;
        }
      }
    }
  }
}

template <typename T>
void UpsampleBackward(const Tensor<T>& grad_out, Tensor<T>& grad_in,
                      const std::vector<AxisTap>& rows, const std::vector<AxisTap>& cols) {
  const Shape& s = grad_in.shape();
  const int oh = grad_out.h(), ow = grad_out.w();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* g = grad_out.plane(n, c);
      T* dst = grad_in.plane(n, c);
      for (int i = 0; i < oh; ++i) {
        const AxisTap& r = rows[i];
        for (int j = 0; j < ow; ++j) {
          const AxisTap& q = cols[j];
          const T v = g[static_cast<std::size_t>(i) * ow + j];
          dst[static_cast<std::size_t>(r.i0) * s.w + q.i0] += static_cast<T>(r.w0 * q.w0) * v;
          if (q.w1 != 0.0) dst[static_cast<std::size_t>(r.i0) * s.w + q.i1] += static_cast<T>(r.w0 * q.w1) * v;
          if (r.w1 != 0.0) {
            dst[static_cast<std::size_t>(r.i1) * s.w + q.i0] += static_cast<T>(r.w1 * q.w0) * v;
            if (q.w1 != 0.0) dst[static_cast<std::size_t>(r.i1) * s.w + q.i1] += static_cast<T>(r.w1 * q.w1) * v;
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> UpsampleWithTables(const Tensor<T>& x, int out_h, int out_w,
                             const std::vector<AxisTap>& rows,
                             const std::vector<AxisTap>& cols) {
  const Shape& s = x.shape();
  Tensor<T> out(Shape{s.n, s.c, out_h, out_w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.plane(n, c);
      T* dst = out.plane(n, c);
      for (int i = 0; i < out_h; ++i) {
        const AxisTap& r = rows[i];
        const T* row0 = src + static_cast<std::size_t>(r.i0) * s.w;
        const T* row1 = src + static_cast<std::size_t>(r.i1) * s.w;
        for (int j = 0; j < out_w; ++j) {
          const AxisTap& q = cols[j];
          double v = r.w0 * (q.w0 * row0[q.i0] + q.w1 * row0[q.i1]);
          if (r.w1 != 0.0) v += r.w1 * (q.w0 * row1[q.i0] + q.w1 * row1[q.i1]);
          dst[static_cast<std::size_t>(i) * out_w + j] = static_cast<T>(v);
        }
      }
    }
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> CircularPad(const Tensor<T>& x, const PadSpec& spec, HorizontalPad mode) {
  const Shape& s = x.shape();
  CheckPad(s, spec, mode);
  if (spec.is_zero()) return x;
  const int oh = s.h + spec.top + spec.bottom;
  const int ow = s.w + spec.left + spec.right;
  Tensor<T> out(Shape{s.n, s.c, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.plane(n, c);
      T* dst = out.plane(n, c);
      for (int i = 0; i < s.h; ++i) {
        const T* row = src + static_cast<std::size_t>(i) * s.w;
        T* orow = dst + static_cast<std::size_t>(i + spec.top) * ow;
        for (int j = 0; j < ow; ++j) {
          const int col = SourceColumn(j, spec.left, s.w, mode);
          orow[j] = col >= 0 ? row[col] : T(0);
        }
      }
    }
  }
  return out;
}

template <typename T>
Var<T> CircularPad(const Var<T>& x, const PadSpec& spec, HorizontalPad mode) {
  if (spec.is_zero()) {
    CheckPad(x.shape(), spec, mode);
    return x;
  }
  return MakeResult<T>(CircularPad(x.value(), spec, mode), {x},
                       [spec, mode](Node<T>& self) {
                         PadBackward(self.grad, self.parents[0]->grad_buffer(), spec, mode);
                       });
}

template <typename T>
Tensor<T> WindowAvgPool(const Tensor<T>& x, int bins_h, int bins_w) {
  const Shape& s = x.shape();
  Require(bins_h > 0 && bins_w > 0, "pool bins must be positive");
  Require(bins_h <= s.h && bins_w <= s.w,
          "pool bins (" + std::to_string(bins_h) + "," + std::to_string(bins_w) +
              ") exceed extent " + s.str());
  Require(s.h % bins_h == 0 && s.w % bins_w == 0,
          "pool bins (" + std::to_string(bins_h) + "," + std::to_string(bins_w) +
              ") must divide extent " + s.str());
  const int wh = s.h / bins_h, ww = s.w / bins_w;
  Tensor<T> out(Shape{s.n, s.c, bins_h, bins_w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.plane(n, c);
      T* dst = out.plane(n, c);
      for (int bi = 0; bi < bins_h; ++bi) {
        for (int bj = 0; bj < bins_w; ++bj) {
          double acc = 0;
          for (int i = bi * wh; i < (bi + 1) * wh; ++i) {
            for (int j = bj * ww; j < (bj + 1) * ww; ++j) {
              acc += src[static_cast<std::size_t>(i) * s.w + j];
            }
          }
          dst[bi * bins_w + bj] = static_cast<T>(acc / (wh * ww));
        }
      }
    }
  }
  return out;
}

template <typename T>
Var<T> WindowAvgPool(const Var<T>& x, int bins_h, int bins_w) {
  return MakeResult<T>(WindowAvgPool(x.value(), bins_h, bins_w), {x}, [](Node<T>& self) {
    PoolBackward(self.grad, self.parents[0]->grad_buffer());
  });
}

template <typename T>
Tensor<T> Upsample(const Tensor<T>& x, int out_h, int out_w, UpsampleMode mode) {
  const Shape& s = x.shape();
  Require(out_h >= s.h && out_w >= s.w,
          "upsample target (" + std::to_string(out_h) + "," + std::to_string(out_w) +
              ") is smaller than source " + s.str());
  if (out_h == s.h && out_w == s.w) return x;
  return UpsampleWithTables(x, out_h, out_w, AxisTable(s.h, out_h, mode),
                            AxisTable(s.w, out_w, mode));
}

template <typename T>
Var<T> Upsample(const Var<T>& x, int out_h, int out_w, UpsampleMode mode) {
  const Shape& s = x.shape();
  Require(out_h >= s.h && out_w >= s.w,
          "upsample target (" + std::to_string(out_h) + "," + std::to_string(out_w) +
              ") is smaller than source " + s.str());
  if (out_h == s.h && out_w == s.w) return x;
  auto rows = AxisTable(s.h, out_h, mode);
  auto cols = AxisTable(s.w, out_w, mode);
  Tensor<T> out = UpsampleWithTables(x.value(), out_h, out_w, rows, cols);
  return MakeResult<T>(std::move(out), {x},
                       [rows = std::move(rows), cols = std::move(cols)](Node<T>& self) {
                         UpsampleBackward(self.grad, self.parents[0]->grad_buffer(), rows, cols);
                       });
}

template <typename T>
Tensor<T> RollHorizontal(const Tensor<T>& x, int shift) {
  const Shape& s = x.shape();
  Tensor<T> out(s);
  if (s.w == 0) return out;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int i = 0; i < s.h; ++i) {
        for (int j = 0; j < s.w; ++j) {
          const int src = (((j - shift) % s.w) + s.w) % s.w;
          out.at(n, c, i, j) = x.at(n, c, i, src);
        }
      }
    }
  }
  return out;
}

#define BICOMPRESS_INSTANTIATE(T)                                                   \
  template Tensor<T> CircularPad<T>(const Tensor<T>&, const PadSpec&, HorizontalPad); \
  template Var<T> CircularPad<T>(const Var<T>&, const PadSpec&, HorizontalPad);       \
  template Tensor<T> WindowAvgPool<T>(const Tensor<T>&, int, int);                    \
  template Var<T> WindowAvgPool<T>(const Var<T>&, int, int);                          \
  template Tensor<T> Upsample<T>(const Tensor<T>&, int, int, UpsampleMode);           \
  template Var<T> Upsample<T>(const Var<T>&, int, int, UpsampleMode);                 \
  template Tensor<T> RollHorizontal<T>(const Tensor<T>&, int);

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

}  // namespace bicompress
