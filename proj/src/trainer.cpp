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

#include "bicompress/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "bicompress/render.hpp"

namespace bicompress {

namespace fs = std::filesystem;

std::vector<PanoramaSample> LoadCorpus(const RunConfig& config) {
  if (config.dataset == DatasetKind::kSynthetic) {
    return SynthPanorama(config.synth_samples, config.height, config.width, config.n_classes,
                         config.synth_seed, config.modality);
  }
  return LoadDataset(ResolveDataRoot(config), config.height, config.width, config.modality);
}

SplitCorpus SplitForFold(const RunConfig& config, const std::vector<PanoramaSample>& corpus,
                         int fold_id) {
  if (fold_id == 0) return {corpus, corpus};
  return ApplySplit(corpus, MakeFoldSplit(fold_id, config.fold_table));
}

namespace {

Tensor<float> Batch(const std::vector<PanoramaSample>& samples, std::size_t begin,
                    std::size_t end) {
  std::vector<Tensor<float>> images;
  for (std::size_t i = begin; i < end; ++i) images.push_back(samples[i].image);
  return StackBatch<float>(images);
}

nlohmann::json ReportJson(const LossReport& r) {
  nlohmann::json ce, kl, l2;
  for (const auto& [b, v] : r.ce) ce[ToString(b)] = v;
  for (const auto& [b, v] : r.kl) kl[ToString(b)] = v;
  for (const auto& [b, v] : r.l2) l2[ToString(b)] = v;
  return {{"ce", ce}, {"kl", kl}, {"l2", l2}, {"base", r.base}, {"distill", r.distill},
          {"total", r.total}};
}

void WriteDiagnostic(const RunConfig& config, const IterationRecord& rec) {
  fs::create_directories(config.output_dir);
  std::ofstream out(fs::path(config.output_dir) / "diagnostic.json");
  out << nlohmann::json{{"reason", "non-finite loss"}, {"epoch", rec.epoch},
                        {"iteration", rec.iteration}, {"lr", rec.lr},
                        {"loss", ReportJson(rec.loss)}, {"config", ToJson(config)}}
             .dump(2)
      << "\n";
}

bool Finite(const LossReport& r) {
  bool ok = std::isfinite(r.total);
  for (const auto* m : {&r.ce, &r.kl, &r.l2}) {
    for (const auto& [_, v] : *m) ok = ok && std::isfinite(v);
  }
  return ok;
}

}  // namespace

TrainResult Train(const RunConfig& config, const std::vector<PanoramaSample>& train,
                  const std::vector<PanoramaSample>& validation, std::ostream* log) {
  config.Validate();
  Require(!train.empty(), "training corpus is empty");
  Require(config.batch_size <= static_cast<int>(train.size()),
          fmt::format("batch_size {} exceeds the {} training samples", config.batch_size,
                      train.size()));
  for (const auto& s : train) {
    ValidateSample(s, config.n_classes);
    Require(s.height() == config.height && s.width() == config.width &&
                s.image.c() == ChannelCount(config.modality),
            "training sample " + s.sample_id + " does not match the configured input");
  }
  if (config.deterministic) SetNumericThreads(1);

  Network<float> net(config.network(), config.seed);
  Adam<float> adam;
  ObjectiveConfig objective = config.objective;
  if (objective.class_weights.empty() &&
      objective.weight_mode == ClassWeightMode::kMedianFrequency) {
    std::vector<LabelMap> labels;
    for (const auto& s : train) labels.push_back(s.labels);
    objective.class_weights = ClassWeights(labels, config.n_classes);
  }

  TrainResult result;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(SampleSeed(config.seed, 0x5eedULL));
  const ScheduleConfig schedule = config.schedule();
  nlohmann::json history = nlohmann::json::array();
  int iteration = 0;

  for (int epoch = 0; epoch < config.max_iter; ++epoch) {
    const double lr = PolyLr(schedule, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = SampleSeed(config.seed, 1 + static_cast<std::uint64_t>(epoch));
    double epoch_loss = 0;
    int epoch_steps = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      std::vector<PanoramaSample> batch;
      std::vector<LabelMap> labels;
      for (std::size_t k = b; k < e; ++k) {
        batch.push_back(ApplyBlackMask(train[order[k]], config.augmentation,
                                       SampleSeed(epoch_seed, order[k])));
        labels.push_back(batch.back().labels);
      }
      const Tensor<float> x = Batch(batch, 0, batch.size());

      const NetworkOutputs<float> out = net.Forward(x, ForwardOptions::Train());
      LossResult<float> loss = TotalLoss<float>(out.branches, labels, objective);
      IterationRecord rec{epoch, iteration, lr, loss.report};
      if (!Finite(loss.report)) {
        WriteDiagnostic(config, rec);
        throw NonFiniteLoss(fmt::format("non-finite loss at epoch {} iteration {}", epoch,
                                        iteration));
      }
      net.params().ZeroGrad();
      Backward(loss.total);
      adam.Step(net.params(), lr);

      if (log) {
        *log << fmt::format(
            "epoch {:4d}/{} iter {:5d} lr {:.4e} loss {:.5f} ce_eb {:.5f} distill {:.5f}\n",
            epoch + 1, config.max_iter, iteration, lr, loss.report.total,
            loss.report.ce.at(Branch::kEb), loss.report.distill);
        log->flush();
      }
      epoch_loss += loss.report.total;
      ++epoch_steps;
      result.iterations.push_back(std::move(rec));
      ++iteration;
    }

    nlohmann::json entry{{"epoch", epoch + 1}, {"lr", lr}, {"loss", epoch_loss / epoch_steps}};
    const bool last = epoch + 1 == config.max_iter;
    const bool due = config.validate_every > 0 && (epoch + 1) % config.validate_every == 0;
    if (!validation.empty() && (due || last)) {
      const EvalReport r = Evaluate(net, validation);
      result.validations.push_back({epoch + 1, r.metrics, r.pixel_accuracy});
      entry["miou"] = r.metrics.miou;
      entry["macc"] = r.metrics.macc;
      entry["pixel_accuracy"] = r.pixel_accuracy;
      if (log) {
        *log << fmt::format("validate epoch {:4d} miou {:.4f} macc {:.4f} pixel_acc {:.4f}\n",
                            epoch + 1, r.metrics.miou, r.metrics.macc, r.pixel_accuracy);
      }
    }
    history.push_back(std::move(entry));
  }

  result.checkpoint = Capture(net, &adam);
  result.checkpoint.config = ToJson(config);
  result.checkpoint.config["class_weights"] = objective.class_weights;
  result.checkpoint.iteration = iteration;
  result.checkpoint.history = std::move(history);
  return result;
}

namespace {

std::vector<LabelMap> Argmax(const Tensor<float>& z) {
  std::vector<LabelMap> maps;
  for (int n = 0; n < z.n(); ++n) {
    LabelMap m(z.h(), z.w(), 0);
    for (int i = 0; i < z.h(); ++i) {
      for (int j = 0; j < z.w(); ++j) {
        int best = 0;
        float best_v = z.at(n, 0, i, j);
        for (int c = 1; c < z.c(); ++c) {
          const float v = z.at(n, c, i, j);
          if (v > best_v) {
            best_v = v;
            best = c;
          }
        }
        m.at(i, j) = best;
      }
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

void Finish(EvalReport& report) {
  report.metrics = MiouMacc(report.confusion);
  std::int64_t correct = 0;
  for (int c = 0; c < report.confusion.n_classes(); ++c) correct += report.confusion.at(c, c);
  report.pixel_accuracy =
      static_cast<double>(correct) / static_cast<double>(report.confusion.total());
}

}  // namespace

std::vector<LabelMap> PredictLabels(const Network<float>& network, const Tensor<float>& images) {
  NoGradGuard no_grad;
  const NetworkOutputs<float> out = network.Forward(images, ForwardOptions::Eval());
  return Argmax(out.branches.at(Branch::kEb).logits.value());
}

EvalReport Evaluate(const Network<float>& network, const std::vector<PanoramaSample>& samples,
                    int batch_size) {
  Require(!samples.empty(), "evaluation corpus is empty");
  EvalReport report;
  report.confusion = ConfusionMatrix(network.config().n_classes);
  for (std::size_t b = 0; b < samples.size(); b += batch_size) {
    const std::size_t e = std::min(samples.size(), b + batch_size);
    const std::vector<LabelMap> pred = PredictLabels(network, Batch(samples, b, e));
    for (std::size_t k = b; k < e; ++k) report.confusion.Accumulate(pred[k - b], samples[k].labels);
  }
  Finish(report);
  return report;
}

std::map<Branch, EvalReport> EvaluateBranches(const Network<float>& network,
                                              const std::vector<PanoramaSample>& samples,
                                              int batch_size) {
  Require(!samples.empty(), "evaluation corpus is empty");
  std::map<Branch, EvalReport> reports;
  for (Branch br : kAllBranches) reports[br].confusion = ConfusionMatrix(network.config().n_classes);
  NoGradGuard no_grad;
  for (std::size_t b = 0; b < samples.size(); b += batch_size) {
    const std::size_t e = std::min(samples.size(), b + batch_size);
    const NetworkOutputs<float> out = network.Forward(Batch(samples, b, e), {true, false});
    for (Branch br : kAllBranches) {
      const std::vector<LabelMap> pred = Argmax(out.branches.at(br).logits.value());
      for (std::size_t k = b; k < e; ++k) {
        reports[br].confusion.Accumulate(pred[k - b], samples[k].labels);
      }
    }
  }
  for (auto& [br, r] : reports) Finish(r);
  return reports;
}

LoadedModel ModelFromCheckpoint(const Checkpoint& checkpoint, bool inference_only) {
  LoadedModel m;
  try {
    m.config = RunConfigFromJson(checkpoint.config);
  } catch (const Error& e) {
    throw CheckpointError(fmt::format("checkpoint (format v{}): unusable config snapshot: {}",
                                      kCheckpointVersion, e.what()));
  }
  m.network = std::make_unique<Network<float>>(m.config.network(), m.config.seed);
  Restore(checkpoint, *m.network, inference_only);
  return m;
}

EvalReport EvaluateCheckpoint(const Checkpoint& checkpoint,
                              const std::vector<PanoramaSample>& samples) {
  LoadedModel m = ModelFromCheckpoint(checkpoint);
  for (const auto& s : samples) {
    Require(s.height() == m.config.height && s.width() == m.config.width,
            fmt::format("checkpoint resolution {}x{} does not match data resolution {}x{}",
                        m.config.height, m.config.width, s.height(), s.width()));
    Require(s.image.c() == ChannelCount(m.config.modality),
            "checkpoint modality does not match the data channels");
  }
  return Evaluate(*m.network, samples);
}

PredictFiles PredictFile(const Checkpoint& checkpoint, const fs::path& image,
                         const std::optional<fs::path>& depth, const fs::path& out_dir) {
  LoadedModel m = ModelFromCheckpoint(checkpoint);
  const cv::Mat bgr = cv::imread(image.string(), cv::IMREAD_COLOR);
  Require(!bgr.empty(), "cannot read image " + image.string());
  Require(bgr.cols == 2 * bgr.rows, fmt::format("input {}x{} is not ERP: W must equal 2H",
                                                bgr.rows, bgr.cols));
  const int h = m.config.height;
  const int w = m.config.width;
  const int channels = ChannelCount(m.config.modality);

  cv::Mat rgb, rgbf;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(rgbf, CV_32FC3, 1.0 / 255.0);
  if (rgbf.rows != h) cv::resize(rgbf, rgbf, cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
  Tensor<float> x(Shape{1, channels, h, w});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const cv::Vec3f& p = rgbf.at<cv::Vec3f>(i, j);
      for (int c = 0; c < 3; ++c) x.at(0, c, i, j) = std::clamp(p[c], 0.f, 1.f);
    }
  }
  if (channels == 4 && depth) {
    const DatasetOptions opt;
    cv::Mat d16 = cv::imread(depth->string(), cv::IMREAD_UNCHANGED);
    Require(!d16.empty() && d16.type() == CV_16UC1, "depth must be a 16-bit gray PNG");
    Require(d16.size() == bgr.size(), "depth and image sizes differ");
    cv::Mat df(d16.rows, d16.cols, CV_32FC1);
    for (int i = 0; i < d16.rows; ++i) {
      for (int j = 0; j < d16.cols; ++j) {
        const std::uint16_t raw = d16.at<std::uint16_t>(i, j);
        df.at<float>(i, j) =
            raw == opt.depth_invalid
                ? 0.f
                : static_cast<float>(std::min(raw / opt.depth_units_per_m, opt.depth_max_m) /
                                     opt.depth_max_m);
      }
    }
    if (df.rows != h) cv::resize(df, df, cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) x.at(0, 3, i, j) = std::clamp(df.at<float>(i, j), 0.f, 1.f);
    }
  }

  const LabelMap small = PredictLabels(*m.network, x).front();
  LabelMap labels(bgr.rows, bgr.cols);
  for (int i = 0; i < labels.height; ++i) {
    const int si = static_cast<int>(static_cast<std::int64_t>(i) * h / labels.height);
    for (int j = 0; j < labels.width; ++j) {
      labels.at(i, j) = small.at(si, static_cast<int>(static_cast<std::int64_t>(j) * w / labels.width));
    }
  }

  RgbImage input(bgr.rows, bgr.cols);
  std::copy(rgb.data, rgb.data + input.data.size(), input.data.begin());
  fs::create_directories(out_dir);
  const std::string stem = image.stem().string();
  PredictFiles files{labels, out_dir / (stem + "_labels.png"), out_dir / (stem + "_color.png"),
                     out_dir / (stem + "_panel.png")};
  const RgbImage color = Colorize(labels);
  WriteLabelPng(files.raster, labels);
  WriteRgbPng(files.color, color);
  WriteRgbPng(files.panel, SideBySide(input, color));
  return files;
}

}  // namespace bicompress
