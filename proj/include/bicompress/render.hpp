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

#ifndef BICOMPRESS_RENDER_HPP_
#define BICOMPRESS_RENDER_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bicompress/labels.hpp"
#include "bicompress/tensor.hpp"

namespace bicompress {

// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0) {}
  std::uint8_t* pixel(int i, int j) { return data.data() + (static_cast<std::size_t>(i) * width + j) * 3; }
  const std::uint8_t* pixel(int i, int j) const {
    return data.data() + (static_cast<std::size_t>(i) * width + j) * 3;
  }
  bool operator==(const RgbImage&) const = default;
};

// Palette lookup; IGNORE renders black. Classes beyond the palette throw.
RgbImage Colorize(const LabelMap& labels);

// First three channels of a (1, C, H, W) image in [0, 1].
RgbImage ToRgb(const Tensor<float>& image);

// Left and right concatenated horizontally; heights must match.
RgbImage SideBySide(const RgbImage& left, const RgbImage& right);

void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image);
// 8-bit class-index raster; IGNORE is written as 255.
void WriteLabelPng(const std::filesystem::path& path, const LabelMap& labels);

}  // namespace bicompress

#endif  // BICOMPRESS_RENDER_HPP_
