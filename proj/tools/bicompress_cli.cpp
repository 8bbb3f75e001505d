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

// bicompress: train, evaluate and run panoramic segmentation models.
//
//   bicompress train   --config run.json [--fold N] [--seed N] [--deterministic]
//   bicompress eval    --ckpt model.ckpt --fold N [--config run.json] [--out DIR]
//   bicompress predict --ckpt model.ckpt --image pano.png --out DIR [--depth depth.png]
//   bicompress synth   --n N --out DIR [--height H] [--classes K] [--seed S]

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bicompress/checkpoint.hpp"
#include "bicompress/config.hpp"
#include "bicompress/trainer.hpp"

namespace {

using namespace bicompress;
namespace fs = std::filesystem;

void WriteMetrics(const fs::path& dir, const std::string& stem, const EvalReport& report,
                  int fold) {
  fs::create_directories(dir);
  const auto& names = DefaultClassNames();
  std::ofstream(dir / (stem + ".csv")) << MetricsCsv(report.metrics, names);
  nlohmann::json j = MetricsJson(report.metrics, names, fold);
  j["pixel_accuracy"] = report.pixel_accuracy;
  std::ofstream(dir / (stem + ".json")) << j.dump(2) << "\n";
}

int RunTrain(const std::string& config_path, std::optional<int> fold,
             std::optional<std::uint64_t> seed, bool deterministic) {
  RunConfig config = LoadRunConfig(config_path);
  if (fold) config.fold_id = *fold;
  if (seed) config.seed = *seed;
  if (deterministic) config.deterministic = true;
  config.Validate();

  const std::vector<PanoramaSample> corpus = LoadCorpus(config);
  const SplitCorpus split = SplitForFold(config, corpus, config.fold_id);
  fmt::print("fold {}: {} train / {} test samples at {}x{}\n", config.fold_id,
             split.train.size(), split.test.size(), config.height, config.width);

  fs::create_directories(config.output_dir);
  std::ofstream log(fs::path(config.output_dir) / "train.log");
  struct Tee : std::streambuf {
    std::streambuf* a;
    std::streambuf* b;
    int overflow(int c) override {
      if (c != EOF) {
        a->sputc(static_cast<char>(c));
        b->sputc(static_cast<char>(c));
      }
      return c;
    }
    int sync() override { return a->pubsync() | b->pubsync(); }
  } tee;
  tee.a = std::cout.rdbuf();
  tee.b = log.rdbuf();
  std::ostream out(&tee);

  const TrainResult result = Train(config, split.train, split.test, &out);
  const fs::path ckpt = fs::path(config.output_dir) / "model.ckpt";
  SaveCheckpoint(ckpt, result.checkpoint);
  std::ofstream(fs::path(config.output_dir) / "history.json")
      << result.checkpoint.history.dump(2) << "\n";
  if (!split.test.empty()) {
    WriteMetrics(config.output_dir, fmt::format("metrics_fold{}", config.fold_id),
                 Evaluate(*ModelFromCheckpoint(result.checkpoint).network, split.test),
                 config.fold_id);
  }
  fmt::print("saved {}\n", ckpt.string());
  return 0;
}

int RunEval(const std::string& ckpt_path, int fold, const std::string& config_path,
            const std::string& out_dir) {
  const Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  RunConfig config = config_path.empty() ? RunConfigFromJson(ckpt.config)
                                         : LoadRunConfig(config_path);
  const std::vector<PanoramaSample> corpus = LoadCorpus(config);
  const SplitCorpus split = SplitForFold(config, corpus, fold);
  const EvalReport report = EvaluateCheckpoint(ckpt, split.test);
  fmt::print("fold {} on {} samples: mIoU {:.4f} mAcc {:.4f} pixel accuracy {:.4f}\n", fold,
             split.test.size(), report.metrics.miou, report.metrics.macc, report.pixel_accuracy);
  const fs::path dir = out_dir.empty() ? fs::path(ckpt_path).parent_path() : fs::path(out_dir);
  WriteMetrics(dir, fmt::format("eval_fold{}", fold), report, fold);
  std::cout << MetricsCsv(report.metrics, DefaultClassNames());
  return 0;
}

int RunPredict(const std::string& ckpt_path, const std::string& image, const std::string& depth,
               const std::string& out_dir) {
  const Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  std::optional<fs::path> depth_path;
  if (!depth.empty()) depth_path = depth;
  const PredictFiles files = PredictFile(ckpt, image, depth_path, out_dir);
  fmt::print("{}\n{}\n{}\n", files.raster.string(), files.color.string(), files.panel.string());
  return 0;
}

int RunSynth(int n, const std::string& out_dir, int height, int classes, std::uint64_t seed,
             const std::string& modality) {
  const auto samples = SynthPanorama(n, height, 2 * height, classes, seed, ParseModality(modality));
  WriteDataset(out_dir, samples);
  fmt::print("wrote {} samples to {}\n", samples.size(), out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-directional compression panoramic segmentation"};
  app.require_subcommand(1);

  std::string config_path, ckpt_path, image, depth, out_dir, modality = "rgbd";
  std::optional<int> fold;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  int eval_fold = 0, n = 8, height = 64, classes = kDefaultClasses;
  std::uint64_t synth_seed = 7;

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Flat JSON run config")->required();
  train->add_option("--fold", fold, "Fold id (0 = whole corpus)");
  train->add_option("--seed", seed, "Run seed");
  train->add_flag("--deterministic", deterministic, "Serial numeric kernels");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a fold's test areas");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--fold", eval_fold, "Fold id (0 = whole corpus)")->required();
  eval->add_option("--config", config_path, "Data config (default: checkpoint snapshot)");
  eval->add_option("--out", out_dir, "Metrics directory (default: next to checkpoint)");

  CLI::App* predict = app.add_subcommand("predict", "Segment one panorama");
  predict->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  predict->add_option("--image", image, "8-bit RGB ERP image")->required();
  predict->add_option("--depth", depth, "16-bit depth PNG for RGB-D models");
  predict->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic corpus in the dataset layout");
  synth->add_option("--n", n, "Number of samples")->required();
  synth->add_option("--out", out_dir, "Dataset root")->required();
  synth->add_option("--height", height, "Panorama height (width = 2x)");
  synth->add_option("--classes", classes, "Number of classes");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--modality", modality, "rgb or rgbd");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return RunTrain(config_path, fold, seed, deterministic);
    if (*eval) return RunEval(ckpt_path, eval_fold, config_path, out_dir);
    if (*predict) return RunPredict(ckpt_path, image, depth, out_dir);
    if (*synth) return RunSynth(n, out_dir, height, classes, synth_seed, modality);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
