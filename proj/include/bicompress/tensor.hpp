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

#ifndef BICOMPRESS_TENSOR_HPP_
#define BICOMPRESS_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bicompress/error.hpp"

namespace bicompress {

// Every activation in the network is a dense NCHW block.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(shape), data_(shape.numel(), fill) {
    Require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
            "negative tensor extent " + shape.str());
  }
  Tensor(Shape shape, std::vector<T> values)
      : shape_(shape), data_(std::move(values)) {
    Require(data_.size() == shape.numel(),
            "tensor data size does not match shape " + shape.str());
  }

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  std::size_t index(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) *
               shape_.w +
           w;
  }
  T& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
  const T& at(int n, int c, int h, int w) const {
    return data_[index(n, c, h, w)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Pointer to the (n, c) spatial plane.
  T* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
  const T* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  Tensor& operator+=(const Tensor& other) {
    Require(shape_ == other.shape_, "shape mismatch in += : " + shape_.str() +
                                        " vs " + other.shape_.str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  // Sample slice [n0, n0 + count) along the batch axis.
  Tensor slice_batch(int n0, int count) const {
    Shape s = shape_;
    s.n = count;
    const std::size_t per = static_cast<std::size_t>(shape_.c) * shape_.plane();
    return Tensor(s, std::vector<T>(data_.begin() + n0 * per,
                                    data_.begin() + (n0 + count) * per));
  }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

 private:
  Shape shape_{};
  std::vector<T> data_;
};

template <typename T>
T MaxAbsDiff(const Tensor<T>& a, const Tensor<T>& b) {
  Require(a.shape() == b.shape(), "MaxAbsDiff shape mismatch");
  T m = T(0);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const T d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    m = std::max(m, d);
  }
  return m;
}

// Stacks single-sample tensors along the batch axis.
template <typename T>
Tensor<T> StackBatch(std::span<const Tensor<T>> items) {
  Require(!items.empty(), "StackBatch of nothing");
  Shape s = items.front().shape();
  s.n = 0;
  for (const auto& t : items) {
    Require(t.c() == s.c && t.h() == s.h && t.w() == s.w,
            "StackBatch shape mismatch");
    s.n += t.n();
  }
  std::vector<T> data;
  data.reserve(s.numel());
  for (const auto& t : items) data.insert(data.end(), t.vec().begin(), t.vec().end());
  return Tensor<T>(s, std::move(data));
}

}  // namespace bicompress

#endif  // BICOMPRESS_TENSOR_HPP_
