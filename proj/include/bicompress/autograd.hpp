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

#ifndef BICOMPRESS_AUTOGRAD_HPP_
#define BICOMPRESS_AUTOGRAD_HPP_

// Reverse-mode differentiation over a tape of NCHW tensors.
//
// Every op returns a Var whose node remembers its parents and a closure that
// pushes the node's gradient into them. Leaves created with
// Var::Parameter() accumulate gradients across Backward() calls until
// ZeroGrad(). Graph recording is skipped when no input requires a gradient
// or while a NoGradGuard is alive.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bicompress/tensor.hpp"

namespace bicompress {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor<T>& grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  // Leaf without gradient.
  static Var Constant(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    return Var(std::move(node));
  }
  // Leaf that accumulates a gradient.
  static Var Parameter(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() { return node_->grad_buffer(); }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  void ZeroGrad() { node_->grad = Tensor<T>(); }

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Builds the result node of an op. `backward` receives the result node; it is
// only recorded when gradients are enabled and some parent requires one.
template <typename T>
Var<T> MakeResult(Tensor<T> value, std::vector<Var<T>> parents,
                  std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  bool needs = false;
  if (GradEnabled()) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward);
  }
  return Var<T>(std::move(node));
}

// Runs reverse accumulation from `root`, seeding its gradient with ones (or
// with `seed` when given).
template <typename T>
void Backward(const Var<T>& root, const Tensor<T>* seed = nullptr);

template <typename T> Var<T> Detach(const Var<T>& x);
template <typename T> Var<T> Add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> AddN(std::span<const Var<T>> xs);
template <typename T> Var<T> Scale(const Var<T>& x, T factor);
template <typename T> Var<T> Relu(const Var<T>& x);
// Exact GELU, x * Phi(x).
template <typename T> Var<T> Gelu(const Var<T>& x);
template <typename T> Var<T> ConcatChannels(std::span<const Var<T>> xs);
// Sum of all elements, shape (1,1,1,1).
template <typename T> Var<T> SumAll(const Var<T>& x);
// Sum over elements weighted by a constant tensor of the same shape.
template <typename T> Var<T> WeightedSum(const Var<T>& x, const Tensor<T>& weights);
// Linear combination of scalar vars.
template <typename T>
Var<T> LinearCombination(std::span<const Var<T>> scalars, std::span<const T> coefficients);

template <typename T>
T ScalarValue(const Var<T>& x) {
  Require(x.value().numel() == 1, "ScalarValue on non-scalar " + x.shape().str());
  return x.value()[0];
}

}  // namespace bicompress

#endif  // BICOMPRESS_AUTOGRAD_HPP_
