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

#include "bicompress/nn.hpp"

#include <cblas.h>

#include <cmath>

namespace bicompress {

namespace {

void Gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
          int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
              ldc);
}

void Gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
              ldc);
}

struct ConvGeometry {
  int cin, h, w, cout, kh, kw, sh, sw, oh, ow;
  int k() const { return cin * kh * kw; }
  int p() const { return oh * ow; }
  bool pointwise() const { return kh == 1 && kw == 1 && sh == 1 && sw == 1; }
};

// cols[(ci*kh + ki)*kw + kj][oi*ow + oj] = x[ci][oi*sh + ki][oj*sw + kj]
template <typename T>
void Im2Col(const T* x, const ConvGeometry& g, T* cols) {
  T* dst = cols;
  for (int ci = 0; ci < g.cin; ++ci) {
    const T* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        for (int oi = 0; oi < g.oh; ++oi) {
          const T* row = plane + static_cast<std::size_t>(oi * g.sh + ki) * g.w + kj;
          if (g.sw == 1) {
            std::copy_n(row, g.ow, dst);
            dst += g.ow;
          } else {
            for (int oj = 0; oj < g.ow; ++oj) *dst++ = row[oj * g.sw];
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T* cols, const ConvGeometry& g, T* x) {
  const T* src = cols;
  for (int ci = 0; ci < g.cin; ++ci) {
    T* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        for (int oi = 0; oi < g.oh; ++oi) {
          T* row = plane + static_cast<std::size_t>(oi * g.sh + ki) * g.w + kj;
          for (int oj = 0; oj < g.ow; ++oj) row[oj * g.sw] += *src++;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> ParamStore<T>::AddParam(const std::string& name, Tensor<T> init) {
  Require(!params_.count(name), "duplicate parameter " + name);
  auto v = Var<T>::Parameter(std::move(init));
  params_.emplace(name, v);
  return v;
}

template <typename T>
Tensor<T>& ParamStore<T>::AddBuffer(const std::string& name, Tensor<T> init) {
  Require(!buffers_.count(name), "duplicate buffer " + name);
  return buffers_.emplace(name, std::move(init)).first->second;
}

template <typename T>
Var<T>& ParamStore<T>::param(const std::string& name) {
  auto it = params_.find(name);
  Require(it != params_.end(), "unknown parameter " + name);
  return it->second;
}

template <typename T>
const Var<T>& ParamStore<T>::param(const std::string& name) const {
  auto it = params_.find(name);
  Require(it != params_.end(), "unknown parameter " + name);
  return it->second;
}

template <typename T>
Tensor<T>& ParamStore<T>::buffer(const std::string& name) {
  auto it = buffers_.find(name);
  Require(it != buffers_.end(), "unknown buffer " + name);
  return it->second;
}

template <typename T>
void ParamStore<T>::ZeroGrad() {
  for (auto& [_, v] : params_) v.ZeroGrad();
}

template <typename T>
std::int64_t CountParameters(const ParamStore<T>& store) {
  std::int64_t total = 0;
  for (const auto& [_, v] : store.params()) total += static_cast<std::int64_t>(v.value().numel());
  return total;
}

template <typename T>
Var<T> Conv2dValid(const Var<T>& x, const Var<T>& weight, const Var<T>* bias, int stride_h,
                   int stride_w) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  Require(ws.c == xs.c, "conv input channels " + std::to_string(xs.c) +
                            " do not match weight " + ws.str());
  Require(xs.h >= ws.h && xs.w >= ws.w,
          "conv kernel " + ws.str() + " larger than input " + xs.str());
  ConvGeometry g{xs.c, xs.h, xs.w, ws.n, ws.h, ws.w, stride_h, stride_w,
                 (xs.h - ws.h) / stride_h + 1, (xs.w - ws.w) / stride_w + 1};
  Tensor<T> out(Shape{xs.n, g.cout, g.oh, g.ow});
  std::vector<T> cols;
  if (!g.pointwise()) cols.resize(static_cast<std::size_t>(g.k()) * g.p());
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = x.value().plane(n, 0);
    const T* b = xn;
    if (!g.pointwise()) {
      Im2Col(xn, g, cols.data());
      b = cols.data();
    }
    Gemm(false, false, g.cout, g.p(), g.k(), T(1), weight.value().data(), g.k(), b, g.p(),
         T(0), out.plane(n, 0), g.p());
    if (bias != nullptr) {
      for (int co = 0; co < g.cout; ++co) {
        const T bv = bias->value()[co];
        T* o = out.plane(n, co);
        for (int i = 0; i < g.p(); ++i) o[i] += bv;
      }
    }
  }
  std::vector<Var<T>> parents{x, weight};
  if (bias != nullptr) parents.push_back(*bias);
  return MakeResult<T>(std::move(out), std::move(parents), [g](Node<T>& self) {
    auto& xn = self.parents[0];
    auto& wn = self.parents[1];
    const int batch = xn->value.n();
    std::vector<T> cols;
    if (!g.pointwise()) cols.resize(static_cast<std::size_t>(g.k()) * g.p());
    for (int n = 0; n < batch; ++n) {
      const T* gout = self.grad.plane(n, 0);
      if (wn->requires_grad) {
        const T* b = xn->value.plane(n, 0);
        if (!g.pointwise()) {
          Im2Col(b, g, cols.data());
          b = cols.data();
        }
        Gemm(false, true, g.cout, g.k(), g.p(), T(1), gout, g.p(), b, g.p(), T(1),
             wn->grad_buffer().data(), g.k());
      }
      if (xn->requires_grad) {
        T* gx = xn->grad_buffer().plane(n, 0);
        if (g.pointwise()) {
          Gemm(true, false, g.k(), g.p(), g.cout, T(1), wn->value.data(), g.k(), gout, g.p(),
               T(1), gx, g.p());
        } else {
          Gemm(true, false, g.k(), g.p(), g.cout, T(1), wn->value.data(), g.k(), gout, g.p(),
               T(0), cols.data(), g.p());
          Col2Im(cols.data(), g, gx);
        }
      }
      if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
        auto& gb = self.parents[2]->grad_buffer();
        for (int co = 0; co < g.cout; ++co) {
          const T* o = self.grad.plane(n, co);
          T acc = T(0);
          for (int i = 0; i < g.p(); ++i) acc += o[i];
          gb[co] += acc;
        }
      }
    }
  });
}

template <typename T>
Var<T> DepthwiseConv2dValid(const Var<T>& x, const Var<T>& weight, const Var<T>* bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  Require(ws.n == xs.c && ws.c == 1, "depthwise weight " + ws.str() +
                                         " does not match input " + xs.str());
  const int kh = ws.h, kw = ws.w;
  const int oh = xs.h - kh + 1, ow = xs.w - kw + 1;
  Require(oh > 0 && ow > 0, "depthwise kernel larger than input");
  Tensor<T> out(Shape{xs.n, xs.c, oh, ow});
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      const T* src = x.value().plane(n, c);
      const T* k = weight.value().plane(c, 0);
      T* dst = out.plane(n, c);
      const T bv = bias != nullptr ? bias->value()[c] : T(0);
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          T acc = bv;
          for (int a = 0; a < kh; ++a) {
            for (int b = 0; b < kw; ++b) acc += k[a * kw + b] * src[(i + a) * xs.w + j + b];
          }
          dst[i * ow + j] = acc;
        }
      }
    }
  }
  std::vector<Var<T>> parents{x, weight};
  if (bias != nullptr) parents.push_back(*bias);
  return MakeResult<T>(std::move(out), std::move(parents), [kh, kw, oh, ow](Node<T>& self) {
    auto& xn = self.parents[0];
    auto& wn = self.parents[1];
    const Shape& xs = xn->value.shape();
    const bool has_bias = self.parents.size() > 2 && self.parents[2]->requires_grad;
    for (int n = 0; n < xs.n; ++n) {
      for (int c = 0; c < xs.c; ++c) {
        const T* g = self.grad.plane(n, c);
        const T* src = xn->value.plane(n, c);
        const T* k = wn->value.plane(c, 0);
        T* gx = xn->requires_grad ? xn->grad_buffer().plane(n, c) : nullptr;
        T* gk = wn->requires_grad ? wn->grad_buffer().plane(c, 0) : nullptr;
        T gb = T(0);
        for (int i = 0; i < oh; ++i) {
          for (int j = 0; j < ow; ++j) {
            const T go = g[i * ow + j];
            gb += go;
            for (int a = 0; a < kh; ++a) {
              for (int b = 0; b < kw; ++b) {
                const int idx = (i + a) * xs.w + j + b;
                if (gx != nullptr) gx[idx] += k[a * kw + b] * go;
                if (gk != nullptr) gk[a * kw + b] += src[idx] * go;
              }
            }
          }
        }
        if (has_bias) self.parents[2]->grad_buffer()[c] += gb;
      }
    }
  });
}

template <typename T>
Conv2d<T>::Conv2d(ParamStore<T>& store, const std::string& name, const ConvOptions& options)
    : options_(options), name_(name) {
  Require(options.in_channels > 0 && options.out_channels > 0,
          "conv " + name + " needs positive channel counts");
  Require(options.stride >= 1, "conv " + name + " stride must be >= 1");
  if (options.depthwise) {
    Require(options.in_channels == options.out_channels,
            "depthwise conv " + name + " must keep channel count");
  }
  const int fan_in =
      (options.depthwise ? 1 : options.in_channels) * options.kernel_h * options.kernel_w;
  Shape ws{options.out_channels, options.depthwise ? 1 : options.in_channels, options.kernel_h,
           options.kernel_w};
  Tensor<T> w(ws);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (auto& v : w.vec()) v = static_cast<T>(dist(store.rng()));
  weight_ = store.AddParam(name + ".weight", std::move(w));
  if (options.bias) {
    bias_ = store.AddParam(name + ".bias", Tensor<T>(Shape{1, options.out_channels, 1, 1}));
  }
}

template <typename T>
Var<T> Conv2d<T>::operator()(const Var<T>& x) const {
  Var<T> input = x;
  if (options_.same_padding && (options_.kernel_h > 1 || options_.kernel_w > 1)) {
    const int ph = (options_.kernel_h - 1) / 2;
    const int pw = (options_.kernel_w - 1) / 2;
    input = CircularPad(x, PadSpec::Symmetric(pw, ph), options_.horizontal);
  }
  const Var<T>* bias = bias_.defined() ? &bias_ : nullptr;
  if (options_.depthwise) {
    Require(options_.stride == 1, "depthwise conv supports stride 1 only");
    return DepthwiseConv2dValid(input, weight_, bias);
  }
  return Conv2dValid(input, weight_, bias, options_.stride, options_.stride);
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(ParamStore<T>& store, const std::string& name, int channels)
    : channels_(channels) {
  const Shape s{1, channels, 1, 1};
  gamma_ = store.AddParam(name + ".gamma", Tensor<T>(s, T(1)));
  beta_ = store.AddParam(name + ".beta", Tensor<T>(s, T(0)));
  running_mean_ = &store.AddBuffer(name + ".running_mean", Tensor<T>(s, T(0)));
  running_var_ = &store.AddBuffer(name + ".running_var", Tensor<T>(s, T(1)));
}

template <typename T>
Var<T> BatchNorm2d<T>::operator()(const Var<T>& x, bool training) const {
  const Shape& s = x.shape();
  Require(s.c == channels_, "batch norm expects " + std::to_string(channels_) +
                                " channels, got " + s.str());
  const std::size_t plane = s.plane();
  const std::size_t count = plane * s.n;
  std::vector<T> mean(s.c), inv_std(s.c);
  for (int c = 0; c < s.c; ++c) {
    if (training) {
      double sum = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.value().plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double mu = sum / count;
      double sq = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.value().plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      const double var = sq / count;
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + kEpsilon));
      const double unbiased = count > 1 ? sq / (count - 1) : var;
      (*running_mean_)[c] =
          static_cast<T>((1 - kMomentum) * (*running_mean_)[c] + kMomentum * mu);
      (*running_var_)[c] =
          static_cast<T>((1 - kMomentum) * (*running_var_)[c] + kMomentum * unbiased);
    } else {
      mean[c] = (*running_mean_)[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>((*running_var_)[c]) + kEpsilon));
    }
  }
  Tensor<T> out(s);
  Tensor<T> xhat(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* p = x.value().plane(n, c);
      T* xh = xhat.plane(n, c);
      T* o = out.plane(n, c);
      const T g = gamma_.value()[c], b = beta_.value()[c];
      for (std::size_t i = 0; i < plane; ++i) {
        xh[i] = (p[i] - mean[c]) * inv_std[c];
        o[i] = xh[i] * g + b;
      }
    }
  }
  return MakeResult<T>(
      std::move(out), {x, gamma_, beta_},
      [training, inv_std = std::move(inv_std), xhat = std::move(xhat)](Node<T>& self) {
        auto& xn = self.parents[0];
        auto& gn = self.parents[1];
        auto& bn = self.parents[2];
        const Shape& s = xn->value.shape();
        const std::size_t plane = s.plane();
        const T count = static_cast<T>(plane * s.n);
        for (int c = 0; c < s.c; ++c) {
          T sum_dy = 0, sum_dy_xhat = 0;
          for (int n = 0; n < s.n; ++n) {
            const T* dy = self.grad.plane(n, c);
            const T* xh = xhat.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
              sum_dy += dy[i];
              sum_dy_xhat += dy[i] * xh[i];
            }
          }
          if (gn->requires_grad) gn->grad_buffer()[c] += sum_dy_xhat;
          if (bn->requires_grad) bn->grad_buffer()[c] += sum_dy;
          if (!xn->requires_grad) continue;
          const T g = gn->value[c];
          for (int n = 0; n < s.n; ++n) {
            const T* dy = self.grad.plane(n, c);
            const T* xh = xhat.plane(n, c);
            T* dx = xn->grad_buffer().plane(n, c);
            if (training) {
              const T scale = g * inv_std[c] / count;
              for (std::size_t i = 0; i < plane; ++i) {
                dx[i] += scale * (count * dy[i] - sum_dy - xh[i] * sum_dy_xhat);
              }
            } else {
              const T scale = g * inv_std[c];
              for (std::size_t i = 0; i < plane; ++i) dx[i] += scale * dy[i];
            }
          }
        }
      });
}

template <typename T>
ConvBnAct<T>::ConvBnAct(ParamStore<T>& store, const std::string& name, ConvOptions options,
                        bool relu)
    : relu_(relu) {
  options.bias = false;
  conv_ = Conv2d<T>(store, name + ".conv", options);
  bn_ = BatchNorm2d<T>(store, name + ".bn", options.out_channels);
}

template <typename T>
Var<T> ConvBnAct<T>::operator()(const Var<T>& x, bool training) const {
  Var<T> y = bn_(conv_(x), training);
  return relu_ ? Relu(y) : y;
}

#define BICOMPRESS_INSTANTIATE(T)                                                       \
  template class ParamStore<T>;                                                         \
  template std::int64_t CountParameters<T>(const ParamStore<T>&);                       \
  template Var<T> Conv2dValid<T>(const Var<T>&, const Var<T>&, const Var<T>*, int, int); \
  template Var<T> DepthwiseConv2dValid<T>(const Var<T>&, const Var<T>&, const Var<T>*);  \
  template class Conv2d<T>;                                                             \
  template class BatchNorm2d<T>;                                                        \
  template class ConvBnAct<T>;

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

void SetNumericThreads(int threads) { openblas_set_num_threads(threads > 0 ? threads : 1); }

}  // namespace bicompress
