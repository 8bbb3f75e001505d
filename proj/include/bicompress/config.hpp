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

#ifndef BICOMPRESS_CONFIG_HPP_
#define BICOMPRESS_CONFIG_HPP_

// Run configuration as a flat JSON object. Recognized keys:
//
//   height, width, modality ("rgb" | "rgbd"), batch_size, base_lr, max_iter
//   (epochs), poly_power, fold (0 = whole corpus for train and test),
//   fold_table ({"<fold>": [test areas]}), seed, deterministic,
//   mask_enabled, hole_fractions ([[fh, fw], ...]), alpha, beta, gamma,
//   class_weighting ("median_frequency" | "uniform"), class_weights,
//   encoder ("small-residual-unet" | "deep-resnet-style"), c_fpn, c_b,
//   n_classes, validate_every, output_dir, dataset ("synthetic" |
//   "directory"), data_root, synth_samples, synth_seed
//
// A preset for (batch_size, base_lr, max_iter) is bound to the resolutions
// 64x128, 256x512 and 512x1024; keys present in the file override it.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "bicompress/network.hpp"
#include "bicompress/objective.hpp"
#include "bicompress/pano_data.hpp"

namespace bicompress {

enum class DatasetKind { kSynthetic, kDirectory };

struct TrainingPreset {
  int batch_size;
  double base_lr;
  int max_iter;
};

// Preset for a 64x128, 256x512 or 512x1024 resolution; empty otherwise.
std::optional<TrainingPreset> PresetFor(int height, int width);

struct RunConfig {
  int height = 64;
  int width = 128;
  Modality modality = Modality::kRgbd;
  int batch_size = 16;
  double base_lr = 1e-3;
  int max_iter = 300;
  double poly_power = 0.9;
  int fold_id = 1;
  FoldTable fold_table = DefaultFoldTable();
  std::uint64_t seed = 0;
  bool deterministic = false;
  MaskSpec augmentation;
  ObjectiveConfig objective;
  EncoderConfig encoder;
  int c_b = 32;
  int n_classes = kDefaultClasses;
  int validate_every = 10;
  std::string output_dir = "runs/default";
  DatasetKind dataset = DatasetKind::kSynthetic;
  std::string data_root;  // empty: BICOMPRESS_DATA_ROOT
  int synth_samples = 8;
  std::uint64_t synth_seed = 7;

  // Throws unless H is divisible by 32 and W = 2H, among others.
  void Validate() const;

  NetworkConfig network() const;
  ScheduleConfig schedule() const { return {base_lr, max_iter, poly_power}; }
};

// Applies the resolution preset, then every key of `j`. Unknown keys throw.
RunConfig RunConfigFromJson(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::string& path);
nlohmann::json ToJson(const RunConfig& config);

// data_root, else BICOMPRESS_DATA_ROOT, else throws.
std::string ResolveDataRoot(const RunConfig& config);

}  // namespace bicompress

#endif  // BICOMPRESS_CONFIG_HPP_
