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

#include "bicompress/autograd.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

namespace bicompress {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
void Backward(const Var<T>& root, const Tensor<T>* seed) {
  Require(root.defined(), "Backward on undefined var");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Node<T>* top = root.node().get();
  if (seed != nullptr) {
    Require(seed->shape() == top->value.shape(), "Backward seed shape mismatch");
    top->grad_buffer() += *seed;
  } else {
    Tensor<T>& g = top->grad_buffer();
    for (auto& v : g.vec()) v += T(1);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
}

template <typename T>
Var<T> Detach(const Var<T>& x) {
  return Var<T>::Constant(x.value());
}

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  Require(a.shape() == b.shape(),
          "Add shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  Tensor<T> out = a.value();
  out += b.value();
  return MakeResult<T>(std::move(out), {a, b}, [](Node<T>& self) {
    for (auto& p : self.parents) {
      if (p->requires_grad) p->grad_buffer() += self.grad;
    }
  });
}

template <typename T>
Var<T> AddN(std::span<const Var<T>> xs) {
  Require(!xs.empty(), "AddN of nothing");
  Tensor<T> out = xs.front().value();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    Require(xs[i].shape() == out.shape(), "AddN shape mismatch");
    out += xs[i].value();
  }
  return MakeResult<T>(std::move(out), std::vector<Var<T>>(xs.begin(), xs.end()),
                       [](Node<T>& self) {
                         for (auto& p : self.parents) {
                           if (p->requires_grad) p->grad_buffer() += self.grad;
                         }
                       });
}

template <typename T>
Var<T> Scale(const Var<T>& x, T factor) {
  Tensor<T> out = x.value();
  for (auto& v : out.vec()) v *= factor;
  return MakeResult<T>(std::move(out), {x}, [factor](Node<T>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += factor * self.grad[i];
  });
}

template <typename T>
Var<T> Relu(const Var<T>& x) {
  Tensor<T> out = x.value();
  for (auto& v : out.vec()) v = v > T(0) ? v : T(0);
  return MakeResult<T>(std::move(out), {x}, [](Node<T>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (self.value[i] > T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> Gelu(const Var<T>& x) {
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  Tensor<T> out = x.value();
  for (auto& v : out.vec()) v = v * T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
  return MakeResult<T>(std::move(out), {x}, [inv_sqrt2, inv_sqrt2pi](Node<T>& self) {
    const Tensor<T>& in = self.parents[0]->value;
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const T v = in[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Var<T> ConcatChannels(std::span<const Var<T>> xs) {
  Require(!xs.empty(), "ConcatChannels of nothing");
  Shape s = xs.front().shape();
  s.c = 0;
  for (const auto& x : xs) {
    Require(x.shape().n == s.n && x.shape().h == s.h && x.shape().w == s.w,
            "ConcatChannels spatial/batch mismatch: " + x.shape().str() + " vs " +
                xs.front().shape().str());
    s.c += x.shape().c;
  }
  Tensor<T> out(s);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    int c0 = 0;
    for (const auto& x : xs) {
      const auto& v = x.value();
      std::copy_n(v.plane(n, 0), v.c() * plane, out.plane(n, c0));
      c0 += v.c();
    }
  }
  return MakeResult<T>(std::move(out), std::vector<Var<T>>(xs.begin(), xs.end()),
                       [](Node<T>& self) {
                         const Shape& s = self.value.shape();
                         const std::size_t plane = s.plane();
                         for (int n = 0; n < s.n; ++n) {
                           int c0 = 0;
                           for (auto& p : self.parents) {
                             const int pc = p->value.c();
                             if (p->requires_grad) {
                               T* dst = p->grad_buffer().plane(n, 0);
                               const T* src = self.grad.plane(n, c0);
                               for (std::size_t i = 0; i < pc * plane; ++i) dst[i] += src[i];
                             }
                             c0 += pc;
                           }
                         }
                       });
}

template <typename T>
Var<T> SumAll(const Var<T>& x) {
  T total = T(0);
  for (T v : x.value().vec()) total += v;
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, total), {x}, [](Node<T>& self) {
    auto& g = self.parents[0]->grad_buffer();
    const T seed = self.grad[0];
    for (auto& v : g.vec()) v += seed;
  });
}

template <typename T>
Var<T> WeightedSum(const Var<T>& x, const Tensor<T>& weights) {
  Require(x.shape() == weights.shape(), "WeightedSum shape mismatch");
  T total = T(0);
  for (std::size_t i = 0; i < weights.numel(); ++i) total += weights[i] * x.value()[i];
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, total), {x},
                       [weights](Node<T>& self) {
                         auto& g = self.parents[0]->grad_buffer();
                         const T seed = self.grad[0];
                         for (std::size_t i = 0; i < g.numel(); ++i) g[i] += seed * weights[i];
                       });
}

template <typename T>
Var<T> LinearCombination(std::span<const Var<T>> scalars, std::span<const T> coefficients) {
  Require(scalars.size() == coefficients.size(), "LinearCombination arity mismatch");
  T total = T(0);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    total += coefficients[i] * ScalarValue(scalars[i]);
  }
  std::vector<T> coeffs(coefficients.begin(), coefficients.end());
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, total),
                       std::vector<Var<T>>(scalars.begin(), scalars.end()),
                       [coeffs](Node<T>& self) {
                         for (std::size_t i = 0; i < self.parents.size(); ++i) {
                           auto& p = self.parents[i];
                           if (p->requires_grad) p->grad_buffer()[0] += coeffs[i] * self.grad[0];
                         }
                       });
}

#define BICOMPRESS_INSTANTIATE(T)                                                   \
  template void Backward<T>(const Var<T>&, const Tensor<T>*);                       \
  template Var<T> Detach<T>(const Var<T>&);                                         \
  template Var<T> Add<T>(const Var<T>&, const Var<T>&);                             \
  template Var<T> AddN<T>(std::span<const Var<T>>);                                 \
  template Var<T> Scale<T>(const Var<T>&, T);                                       \
  template Var<T> Relu<T>(const Var<T>&);                                           \
  template Var<T> Gelu<T>(const Var<T>&);                                           \
  template Var<T> ConcatChannels<T>(std::span<const Var<T>>);                       \
  template Var<T> SumAll<T>(const Var<T>&);                                         \
  template Var<T> WeightedSum<T>(const Var<T>&, const Tensor<T>&);                  \
  template Var<T> LinearCombination<T>(std::span<const Var<T>>, std::span<const T>);

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

}  // namespace bicompress
