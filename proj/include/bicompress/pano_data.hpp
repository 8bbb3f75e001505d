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

#ifndef BICOMPRESS_PANO_DATA_HPP_
#define BICOMPRESS_PANO_DATA_HPP_

// Panorama corpora: the on-disk dataset layout, cross-validation folds,
// black-mask augmentation and a procedural indoor-scene generator.
//
// Layout under a dataset root:
//
//   <root>/classes.json                      {"classes": [13 names], "ignore": <raster value>}
//   <root>/area_<k>/rgb/<id>.png             8-bit RGB
//   <root>/area_<k>/depth/<id>.png           16-bit depth (RGB-D only)
//   <root>/area_<k>/semantic/<id>.png        8-bit class-index raster

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bicompress/labels.hpp"
#include "bicompress/tensor.hpp"

namespace bicompress {

enum class Modality { kRgb, kRgbd };

std::string ToString(Modality modality);
Modality ParseModality(const std::string& name);
inline int ChannelCount(Modality m) { return m == Modality::kRgb ? 3 : 4; }

struct PanoramaSample {
  Tensor<float> image;  // (1, C, H, W), values in [0, 1]
  LabelMap labels;      // H x W
  int area_id = 1;
  std::string sample_id;

  int height() const { return image.h(); }
  int width() const { return image.w(); }
};

// Throws unless W = 2H, every label is a class index below n_classes or IGNORE,
// and image values lie in [0, 1].
void ValidateSample(const PanoramaSample& sample, int n_classes);

struct FoldSplit {
  int fold_id = 1;
  std::set<int> train_areas;
  std::set<int> test_areas;
};

// Test areas per fold: 1 -> {5}, 2 -> {2, 4}, 3 -> {1, 3, 6}.
using FoldTable = std::map<int, std::set<int>>;
const FoldTable& DefaultFoldTable();

FoldSplit MakeFoldSplit(int fold_id, const FoldTable& table = DefaultFoldTable());

struct SplitCorpus {
  std::vector<PanoramaSample> train;
  std::vector<PanoramaSample> test;
};
SplitCorpus ApplySplit(const std::vector<PanoramaSample>& corpus, const FoldSplit& split);

// Hole sizes as (height, width) fractions of the image. The defaults are the
// 20x40, 80x160 and 160x320 holes of a 512x1024 panorama.
struct MaskSpec {
  std::vector<std::pair<double, double>> hole_fractions{
      {0.0390625, 0.0390625}, {0.15625, 0.15625}, {0.3125, 0.3125}};
  bool enabled = true;

  void Validate() const;
};

struct HoleRect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

// Hole extent for a fraction pair: floor(fraction * extent), at least 1.
std::pair<int, int> HoleSize(const std::pair<double, double>& fraction, int height, int width);

// Samples a hole size uniformly from the set and its top-left corner
// uniformly among positions where it fits, then zeroes every channel inside
// it. Labels are untouched. Deterministic for a given seed.
PanoramaSample ApplyBlackMask(const PanoramaSample& sample, const MaskSpec& spec,
                              std::uint64_t rng_seed, HoleRect* hole = nullptr);

// Corpus-seed / sample-index mixing so per-sample streams do not depend on
// processing order.
std::uint64_t SampleSeed(std::uint64_t corpus_seed, std::uint64_t index);

struct DatasetOptions {
  double depth_max_m = 10.0;
  double depth_units_per_m = 512.0;
  std::uint16_t depth_invalid = 65535;
};

struct ClassTable {
  std::vector<std::string> names;
  int ignore_value = 255;
};

const std::vector<std::string>& DefaultClassNames();
ClassTable ReadClassTable(const std::filesystem::path& path);
void WriteClassTable(const std::filesystem::path& path, const ClassTable& table);

// Reads every sample under root. Images are resized bilinearly, labels with
// nearest neighbour; raster values equal to the ignore value and the black
// void caps at the poles become IGNORE.
std::vector<PanoramaSample> LoadDataset(const std::filesystem::path& root, int height, int width,
                                        Modality modality, const DatasetOptions& options = {});

// Writes samples in the dataset layout (depth written when the image has
// 4 channels, as depth * depth_max_m * depth_units_per_m).
void WriteDataset(const std::filesystem::path& root, const std::vector<PanoramaSample>& samples,
                  const DatasetOptions& options = {});

// Procedural indoor-like scenes: ceiling, wall and floor bands with a
// wavy horizon, plus rectangles of object classes that may wrap around
// the left/right seam. Colors are a fixed function of the class plus seeded
// noise; the 4th channel is a depth-like ramp. Every class in
// [0, n_classes) occurs somewhere in the corpus.
std::vector<PanoramaSample> SynthPanorama(int n_samples, int height, int width, int n_classes,
                                          std::uint64_t rng_seed,
                                          Modality modality = Modality::kRgbd);

}  // namespace bicompress

#endif  // BICOMPRESS_PANO_DATA_HPP_
