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

#ifndef BICOMPRESS_PALETTE_HPP_
#define BICOMPRESS_PALETTE_HPP_

#include <array>
#include <cstdint>

namespace bicompress {

using Rgb8 = std::array<std::uint8_t, 3>;

// One fixed color per class; index order follows DefaultClassNames().
inline constexpr std::array<Rgb8, 13> kClassPalette{{
    {230, 25, 75},    // beam
    {60, 180, 75},    // board
    {255, 225, 25},   // bookcase
    {0, 130, 200},    // ceiling
    {245, 130, 48},   // chair
    {145, 30, 180},   // clutter
    {70, 240, 240},   // column
    {240, 50, 230},   // door
    {210, 245, 60},   // floor
    {250, 190, 212},  // sofa
    {0, 128, 128},    // table
    {220, 190, 255},  // wall
    {170, 110, 40},   // window
}};

// Rendering color of IGNORE pixels.
inline constexpr Rgb8 kIgnoreColor{0, 0, 0};

}  // namespace bicompress

#endif  // BICOMPRESS_PALETTE_HPP_
