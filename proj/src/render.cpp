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

#include "bicompress/render.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "bicompress/palette.hpp"

namespace bicompress {

RgbImage Colorize(const LabelMap& labels) {
  RgbImage out(labels.height, labels.width);
  for (int i = 0; i < labels.height; ++i) {
    for (int j = 0; j < labels.width; ++j) {
      const std::int32_t c = labels.at(i, j);
      Require(c == kIgnoreLabel || (c >= 0 && c < static_cast<int>(kClassPalette.size())),
              "no palette color for class " + std::to_string(c));
      const Rgb8& rgb = c == kIgnoreLabel ? kIgnoreColor : kClassPalette[c];
      std::copy(rgb.begin(), rgb.end(), out.pixel(i, j));
    }
  }
  return out;
}

RgbImage ToRgb(const Tensor<float>& image) {
  Require(image.n() == 1 && image.c() >= 3, "ToRgb expects (1, C>=3, H, W)");
  RgbImage out(image.h(), image.w());
  for (int i = 0; i < image.h(); ++i) {
    for (int j = 0; j < image.w(); ++j) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp<double>(image.at(0, c, i, j), 0.0, 1.0);
        out.pixel(i, j)[c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return out;
}

RgbImage SideBySide(const RgbImage& left, const RgbImage& right) {
  Require(left.height == right.height, "side-by-side panels need equal heights");
  RgbImage out(left.height, left.width + right.width);
  for (int i = 0; i < out.height; ++i) {
    std::copy_n(left.pixel(i, 0), left.width * 3, out.pixel(i, 0));
    std::copy_n(right.pixel(i, 0), right.width * 3, out.pixel(i, left.width));
  }
  return out;
}

void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) throw Error("failed to write " + path.string());
}

void WriteLabelPng(const std::filesystem::path& path, const LabelMap& labels) {
  cv::Mat m(labels.height, labels.width, CV_8UC1);
  for (int i = 0; i < labels.height; ++i) {
    for (int j = 0; j < labels.width; ++j) {
      const std::int32_t c = labels.at(i, j);
      Require(c == kIgnoreLabel || (c >= 0 && c < 255), "label does not fit an 8-bit raster");
      m.at<std::uint8_t>(i, j) = static_cast<std::uint8_t>(c == kIgnoreLabel ? 255 : c);
    }
  }
  if (!cv::imwrite(path.string(), m)) throw Error("failed to write " + path.string());
}

}  // namespace bicompress
