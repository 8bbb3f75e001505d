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

#ifndef BICOMPRESS_TRAINER_HPP_
#define BICOMPRESS_TRAINER_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "bicompress/checkpoint.hpp"
#include "bicompress/config.hpp"
#include "bicompress/metrics.hpp"
#include "bicompress/network.hpp"
#include "bicompress/pano_data.hpp"

namespace bicompress {

struct IterationRecord {
  int epoch = 0;
  int iteration = 0;
  double lr = 0;
  LossReport loss;
};

struct EvalReport {
  ConfusionMatrix confusion{1};
  SegmentationMetrics metrics;
  double pixel_accuracy = 0;
};

struct ValidationRecord {
  int epoch = 0;
  SegmentationMetrics metrics;
  double pixel_accuracy = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<IterationRecord> iterations;
  std::vector<ValidationRecord> validations;
};

// Synthetic corpus or the dataset directory named by the config.
std::vector<PanoramaSample> LoadCorpus(const RunConfig& config);

// Fold 0 trains and tests on the whole corpus.
SplitCorpus SplitForFold(const RunConfig& config, const std::vector<PanoramaSample>& corpus,
                         int fold_id);

// One epoch is ceil(|train| / batch_size) optimizer steps over a seeded
// shuffle; lr follows the poly schedule in epochs. Validation runs every
// `validate_every` epochs and after the last one when `validation` is
// non-empty. `log` receives one line per iteration. Writes diagnostic.json
// to the output directory and throws NonFiniteLoss on NaN/Inf.
TrainResult Train(const RunConfig& config, const std::vector<PanoramaSample>& train,
                  const std::vector<PanoramaSample>& validation, std::ostream* log = nullptr);

// Inference-mode forward of the ensemble head, argmax over classes.
std::vector<LabelMap> PredictLabels(const Network<float>& network, const Tensor<float>& images);

EvalReport Evaluate(const Network<float>& network, const std::vector<PanoramaSample>& samples,
                    int batch_size = 4);

// EB, HDB and VDB heads scored separately with inference-mode normalization.
std::map<Branch, EvalReport> EvaluateBranches(const Network<float>& network,
                                              const std::vector<PanoramaSample>& samples,
                                              int batch_size = 4);

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Network<float>> network;
};

// Rebuilds the network from the checkpoint's config snapshot.
LoadedModel ModelFromCheckpoint(const Checkpoint& checkpoint, bool inference_only = true);

// Throws when the samples' resolution differs from the checkpoint's.
EvalReport EvaluateCheckpoint(const Checkpoint& checkpoint,
                              const std::vector<PanoramaSample>& samples);

struct PredictFiles {
  LabelMap labels;
  std::filesystem::path raster;
  std::filesystem::path color;
  std::filesystem::path panel;
};

// Reads an ERP image (and optional 16-bit depth), resizes it to the model
// resolution, predicts, resizes labels back with nearest neighbour and writes
// <stem>_labels.png, <stem>_color.png and <stem>_panel.png. A missing depth
// file for an RGB-D model yields an all-invalid (zero) depth channel.
PredictFiles PredictFile(const Checkpoint& checkpoint, const std::filesystem::path& image,
                         const std::optional<std::filesystem::path>& depth,
                         const std::filesystem::path& out_dir);

}  // namespace bicompress

#endif  // BICOMPRESS_TRAINER_HPP_
