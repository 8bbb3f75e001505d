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

#include "bicompress/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace bicompress {

std::optional<TrainingPreset> PresetFor(int height, int width) {
  if (height == 64 && width == 128) return TrainingPreset{16, 1e-3, 300};
  if (height == 256 && width == 512) return TrainingPreset{8, 1e-3, 300};
  if (height == 512 && width == 1024) return TrainingPreset{4, 1e-4, 60};
  return std::nullopt;
}

void RunConfig::Validate() const {
  Require(height > 0 && height % 32 == 0, "H must be divisible by 32, got " + std::to_string(height));
  Require(width == 2 * height, "W must equal 2H");
  Require(batch_size > 0, "batch_size must be positive");
  Require(base_lr > 0, "base_lr must be positive");
  Require(max_iter > 0, "max_iter must be positive");
  Require(validate_every >= 0, "validate_every must be non-negative");
  Require(n_classes >= 1 && n_classes <= 255, "n_classes must lie in 1..255");
  Require(synth_samples > 0, "synth_samples must be positive");
  Require(fold_id == 0 || fold_table.count(fold_id), "fold " + std::to_string(fold_id) +
                                                         " is not in the fold table");
  augmentation.Validate();
  objective.Validate();
  schedule().Validate();
  network().Validate();
}

NetworkConfig RunConfig::network() const {
  NetworkConfig n;
  n.height = height;
  n.width = width;
  n.n_classes = n_classes;
  n.encoder = encoder;
  n.encoder.input_channels = ChannelCount(modality);
  n.c_b = c_b;
  return n;
}

namespace {

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys{
      "height",        "width",         "modality",   "batch_size",    "base_lr",
      "max_iter",      "poly_power",    "fold",       "fold_table",    "seed",
      "deterministic", "mask_enabled",  "hole_fractions", "alpha",     "beta",
      "gamma",         "class_weighting", "class_weights", "encoder",  "c_fpn",
      "c_b",           "n_classes",     "validate_every", "output_dir", "dataset",
      "data_root",     "synth_samples", "synth_seed", "stem_channels", "encoder_widths"};
  return keys;
}

template <typename V>
void Read(const nlohmann::json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  Require(j.is_object(), "run config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    Require(KnownKeys().count(key) != 0, "unknown config key '" + key + "'");
  }
  RunConfig c;
  Read(j, "height", c.height);
  c.width = 2 * c.height;
  Read(j, "width", c.width);
  if (auto p = PresetFor(c.height, c.width)) {
    c.batch_size = p->batch_size;
    c.base_lr = p->base_lr;
    c.max_iter = p->max_iter;
  }
  if (j.contains("modality")) c.modality = ParseModality(j["modality"].get<std::string>());
  Read(j, "batch_size", c.batch_size);
  Read(j, "base_lr", c.base_lr);
  Read(j, "max_iter", c.max_iter);
  Read(j, "poly_power", c.poly_power);
  Read(j, "fold", c.fold_id);
  if (j.contains("fold_table")) {
    c.fold_table.clear();
    for (const auto& [key, areas] : j["fold_table"].items()) {
      c.fold_table[std::stoi(key)] = areas.get<std::set<int>>();
    }
  }
  Read(j, "seed", c.seed);
  Read(j, "deterministic", c.deterministic);
  Read(j, "mask_enabled", c.augmentation.enabled);
  Read(j, "hole_fractions", c.augmentation.hole_fractions);
  Read(j, "alpha", c.objective.alpha);
  Read(j, "beta", c.objective.beta);
  Read(j, "gamma", c.objective.gamma);
  if (j.contains("class_weighting")) {
    c.objective.weight_mode = ParseClassWeightMode(j["class_weighting"].get<std::string>());
  }
  Read(j, "class_weights", c.objective.class_weights);
  if (j.contains("encoder")) c.encoder.variant = ParseEncoderVariant(j["encoder"].get<std::string>());
  Read(j, "c_fpn", c.encoder.c_fpn);
  Read(j, "stem_channels", c.encoder.stem_channels);
  Read(j, "encoder_widths", c.encoder.widths);
  Read(j, "c_b", c.c_b);
  Read(j, "n_classes", c.n_classes);
  Read(j, "validate_every", c.validate_every);
  Read(j, "output_dir", c.output_dir);
  if (j.contains("dataset")) {
    const std::string kind = j["dataset"].get<std::string>();
    Require(kind == "synthetic" || kind == "directory", "dataset must be synthetic or directory");
    c.dataset = kind == "synthetic" ? DatasetKind::kSynthetic : DatasetKind::kDirectory;
  }
  Read(j, "data_root", c.data_root);
  Read(j, "synth_samples", c.synth_samples);
  Read(j, "synth_seed", c.synth_seed);
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), "cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed config file " + path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

nlohmann::json ToJson(const RunConfig& c) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [fold, areas] : c.fold_table) table[std::to_string(fold)] = areas;
  return {{"height", c.height},
          {"width", c.width},
          {"modality", ToString(c.modality)},
          {"batch_size", c.batch_size},
          {"base_lr", c.base_lr},
          {"max_iter", c.max_iter},
          {"poly_power", c.poly_power},
          {"fold", c.fold_id},
          {"fold_table", table},
          {"seed", c.seed},
          {"deterministic", c.deterministic},
          {"mask_enabled", c.augmentation.enabled},
          {"hole_fractions", c.augmentation.hole_fractions},
          {"alpha", c.objective.alpha},
          {"beta", c.objective.beta},
          {"gamma", c.objective.gamma},
          {"class_weighting", ToString(c.objective.weight_mode)},
          {"class_weights", c.objective.class_weights},
          {"encoder", ToString(c.encoder.variant)},
          {"c_fpn", c.encoder.c_fpn},
          {"stem_channels", c.encoder.stem_channels},
          {"encoder_widths", c.encoder.widths},
          {"c_b", c.c_b},
          {"n_classes", c.n_classes},
          {"validate_every", c.validate_every},
          {"output_dir", c.output_dir},
          {"dataset", c.dataset == DatasetKind::kSynthetic ? "synthetic" : "directory"},
          {"data_root", c.data_root},
          {"synth_samples", c.synth_samples},
          {"synth_seed", c.synth_seed}};
}

std::string ResolveDataRoot(const RunConfig& config) {
  if (!config.data_root.empty()) return config.data_root;
  if (const char* env = std::getenv("BICOMPRESS_DATA_ROOT"); env && *env) return env;
  throw InvalidArgument("no data_root in config and BICOMPRESS_DATA_ROOT is unset");
}

}  // namespace bicompress
