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

#ifndef BICOMPRESS_LABELS_HPP_
#define BICOMPRESS_LABELS_HPP_

#include <cstdint>
#include <vector>

#include "bicompress/error.hpp"

namespace bicompress {

// Sentinel for pixels excluded from losses and metrics.
inline constexpr std::int32_t kIgnoreLabel = -1;
inline constexpr int kDefaultClasses = 13;

// Row-major H x W class-index raster.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> data;

  LabelMap() = default;
  LabelMap(int h, int w, std::int32_t fill = kIgnoreLabel)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::int32_t& at(int i, int j) { return data[static_cast<std::size_t>(i) * width + j]; }
  std::int32_t at(int i, int j) const { return data[static_cast<std::size_t>(i) * width + j]; }
  std::size_t size() const { return data.size(); }
  bool operator==(const LabelMap&) const = default;
};

inline bool IsValidLabel(std::int32_t v, int n_classes) {
  return v == kIgnoreLabel || (v >= 0 && v < n_classes);
}

}  // namespace bicompress

#endif  // BICOMPRESS_LABELS_HPP_
