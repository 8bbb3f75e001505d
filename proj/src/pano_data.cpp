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

#include "bicompress/pano_data.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "bicompress/palette.hpp"

namespace bicompress {

namespace fs = std::filesystem;

std::string ToString(Modality modality) { return modality == Modality::kRgb ? "rgb" : "rgbd"; }

Modality ParseModality(const std::string& name) {
  if (name == "rgb" || name == "RGB") return Modality::kRgb;
  if (name == "rgbd" || name == "RGB-D" || name == "rgb-d") return Modality::kRgbd;
  throw InvalidArgument("unknown modality '" + name + "'");
}

void ValidateSample(const PanoramaSample& sample, int n_classes) {
  const Tensor<float>& x = sample.image;
  Require(x.n() == 1 && (x.c() == 3 || x.c() == 4),
          "sample image must be (1, 3|4, H, W), got " + x.shape().str());
  Require(x.w() == 2 * x.h(), "W must equal 2H");
  Require(sample.labels.height == x.h() && sample.labels.width == x.w(),
          "label raster size differs from image size");
  for (float v : x.span()) Require(v >= 0.f && v <= 1.f, "image value outside [0, 1]");
  for (std::int32_t v : sample.labels.data) {
    Require(IsValidLabel(v, n_classes), "label value " + std::to_string(v) + " is not a class");
  }
}

const FoldTable& DefaultFoldTable() {
  static const FoldTable table{{1, {5}}, {2, {2, 4}}, {3, {1, 3, 6}}};
  return table;
}

FoldSplit MakeFoldSplit(int fold_id, const FoldTable& table) {
  auto it = table.find(fold_id);
  Require(it != table.end(), "fold id " + std::to_string(fold_id) + " is not in the fold table");
  FoldSplit split;
  split.fold_id = fold_id;
  split.test_areas = it->second;
  for (int a = 1; a <= 6; ++a) {
    if (!split.test_areas.count(a)) split.train_areas.insert(a);
  }
  for (int a : split.test_areas) Require(a >= 1 && a <= 6, "fold table area outside 1..6");
  return split;
}

SplitCorpus ApplySplit(const std::vector<PanoramaSample>& corpus, const FoldSplit& split) {
  SplitCorpus out;
  for (const auto& s : corpus) {
    if (split.test_areas.count(s.area_id)) {
      out.test.push_back(s);
    } else if (split.train_areas.count(s.area_id)) {
      out.train.push_back(s);
    }
  }
  return out;
}

void MaskSpec::Validate() const {
  Require(!enabled || !hole_fractions.empty(), "enabled mask spec has no hole sizes");
  for (const auto& [fh, fw] : hole_fractions) {
    Require(fh > 0 && fh <= 1 && fw > 0 && fw <= 1, "hole fraction outside (0, 1]");
  }
}

std::pair<int, int> HoleSize(const std::pair<double, double>& fraction, int height, int width) {
  const int hh = std::clamp(static_cast<int>(std::floor(fraction.first * height)), 1, height);
  const int hw = std::clamp(static_cast<int>(std::floor(fraction.second * width)), 1, width);
  return {hh, hw};
}

PanoramaSample ApplyBlackMask(const PanoramaSample& sample, const MaskSpec& spec,
                              std::uint64_t rng_seed, HoleRect* hole) {
  if (!spec.enabled || spec.hole_fractions.empty()) {
    if (hole) *hole = HoleRect{};
    return sample;
  }
  spec.Validate();
  std::mt19937_64 rng(rng_seed);
  const int h = sample.height();
  const int w = sample.width();
  std::uniform_int_distribution<std::size_t> pick(0, spec.hole_fractions.size() - 1);
  const auto [hh, hw] = HoleSize(spec.hole_fractions[pick(rng)], h, w);
  std::uniform_int_distribution<int> top_d(0, h - hh);
  std::uniform_int_distribution<int> left_d(0, w - hw);
  HoleRect r{top_d(rng), 0, hh, hw};
  r.left = left_d(rng);

  PanoramaSample out = sample;
  for (int c = 0; c < out.image.c(); ++c) {
    for (int i = r.top; i < r.top + r.height; ++i) {
      float* row = out.image.plane(0, c) + static_cast<std::size_t>(i) * w;
      std::fill(row + r.left, row + r.left + r.width, 0.f);
    }
  }
  if (hole) *hole = r;
  return out;
}

std::uint64_t SampleSeed(std::uint64_t corpus_seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined key.
  std::uint64_t z = corpus_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& DefaultClassNames() {
  static const std::vector<std::string> names{"beam",   "board", "bookcase", "ceiling", "chair",
                                              "clutter", "column", "door",    "floor",   "sofa",
                                              "table",  "wall",  "window"};
  return names;
}

ClassTable ReadClassTable(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open class table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("malformed class table " + path.string() + ": " + e.what());
  }
  if (!j.contains("classes") || !j["classes"].is_array()) {
    throw DatasetError("class table " + path.string() + " lacks a 'classes' array");
  }
  ClassTable t;
  t.names = j["classes"].get<std::vector<std::string>>();
  t.ignore_value = j.value("ignore", 255);
  if (t.names.empty() || t.names.size() > 255) {
    throw DatasetError("class table " + path.string() + " must list 1..255 classes");
  }
  if (t.ignore_value >= 0 && t.ignore_value < static_cast<int>(t.names.size())) {
    throw DatasetError("ignore value " + std::to_string(t.ignore_value) + " collides with a class");
  }
  return t;
}

void WriteClassTable(const fs::path& path, const ClassTable& table) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write class table " + path.string());
  out << nlohmann::json{{"classes", table.names}, {"ignore", table.ignore_value}}.dump(2) << "\n";
}

namespace {

std::vector<std::pair<int, fs::path>> AreaDirectories(const fs::path& root) {
  std::vector<std::pair<int, fs::path>> areas;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (!e.is_directory() || name.rfind("area_", 0) != 0) continue;
    try {
      areas.emplace_back(std::stoi(name.substr(5)), e.path());
    } catch (const std::exception&) {
      throw DatasetError("area directory with non-numeric id: " + e.path().string());
    }
  }
  std::sort(areas.begin(), areas.end());
  return areas;
}

std::vector<fs::path> PngFiles(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// floor(dst * in / out) source index per destination index.
LabelMap ResizeNearest(const LabelMap& in, int height, int width) {
  if (in.height == height && in.width == width) return in;
  LabelMap out(height, width);
  for (int i = 0; i < height; ++i) {
    const int si = static_cast<int>(static_cast<std::int64_t>(i) * in.height / height);
    for (int j = 0; j < width; ++j) {
      const int sj = static_cast<int>(static_cast<std::int64_t>(j) * in.width / width);
      out.at(i, j) = in.at(si, sj);
    }
  }
  return out;
}

cv::Mat ResizeBilinear(const cv::Mat& in, int height, int width) {
  if (in.rows == height && in.cols == width) return in;
  cv::Mat out;
  cv::resize(in, out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return out;
}

// Black runs touching the top or bottom edge of each column.
void MarkVoidCaps(const cv::Mat& rgb8, LabelMap& labels) {
  auto black = [&](int i, int j) {
    const cv::Vec3b& p = rgb8.at<cv::Vec3b>(i, j);
    return p[0] == 0 && p[1] == 0 && p[2] == 0;
  };
  for (int j = 0; j < rgb8.cols; ++j) {
    for (int i = 0; i < rgb8.rows && black(i, j); ++i) labels.at(i, j) = kIgnoreLabel;
    for (int i = rgb8.rows - 1; i >= 0 && black(i, j); --i) labels.at(i, j) = kIgnoreLabel;
  }
}

cv::Mat ReadImage(const fs::path& path, int flags, const std::string& what) {
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw DatasetError("cannot read " + what + " file " + path.string());
  return m;
}

}  // namespace

std::vector<PanoramaSample> LoadDataset(const fs::path& root, int height, int width,
                                        Modality modality, const DatasetOptions& options) {
  Require(height > 0 && width == 2 * height, "W must equal 2H");
  if (!fs::is_directory(root)) throw DatasetError("dataset root " + root.string() + " not found");
  const ClassTable table = ReadClassTable(root / "classes.json");
  const int n_classes = static_cast<int>(table.names.size());
  const int channels = ChannelCount(modality);

  std::vector<PanoramaSample> samples;
  for (const auto& [area_id, area_dir] : AreaDirectories(root)) {
    for (const fs::path& rgb_path : PngFiles(area_dir / "rgb")) {
      const std::string id = rgb_path.stem().string();
      const std::string tag = fmt::format("area_{}/{}", area_id, id);
      const fs::path sem_path = area_dir / "semantic" / (id + ".png");
      const fs::path depth_path = area_dir / "depth" / (id + ".png");
      if (!fs::exists(sem_path)) throw DatasetError("missing label file for sample " + tag);
      if (modality == Modality::kRgbd && !fs::exists(depth_path)) {
        throw DatasetError("missing depth file for sample " + tag);
      }

      cv::Mat bgr = ReadImage(rgb_path, cv::IMREAD_COLOR, "image");
      cv::Mat rgb;
      cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
      cv::Mat sem = ReadImage(sem_path, cv::IMREAD_UNCHANGED, "label");
      if (sem.type() != CV_8UC1) throw DatasetError("label raster of " + tag + " is not 8-bit gray");
      if (sem.size() != rgb.size()) throw DatasetError("label and image sizes differ for " + tag);

      LabelMap raw(sem.rows, sem.cols);
      for (int i = 0; i < sem.rows; ++i) {
        for (int j = 0; j < sem.cols; ++j) {
          const int v = sem.at<std::uint8_t>(i, j);
          if (v == table.ignore_value) continue;
          if (v >= n_classes) {
            throw DatasetError(fmt::format("unknown class id {} in label raster of {}", v, tag));
          }
          raw.at(i, j) = v;
        }
      }
      MarkVoidCaps(rgb, raw);

      PanoramaSample s;
      s.area_id = area_id;
      s.sample_id = id;
      s.labels = ResizeNearest(raw, height, width);
      s.image = Tensor<float>(Shape{1, channels, height, width});

      cv::Mat rgbf;
      rgb.convertTo(rgbf, CV_32FC3, 1.0 / 255.0);
      rgbf = ResizeBilinear(rgbf, height, width);
      for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
          const cv::Vec3f& p = rgbf.at<cv::Vec3f>(i, j);
          for (int c = 0; c < 3; ++c) s.image.at(0, c, i, j) = std::clamp(p[c], 0.f, 1.f);
        }
      }

      if (modality == Modality::kRgbd) {
        cv::Mat d16 = ReadImage(depth_path, cv::IMREAD_UNCHANGED, "depth");
        if (d16.type() != CV_16UC1) throw DatasetError("depth of " + tag + " is not 16-bit gray");
        if (d16.size() != rgb.size()) throw DatasetError("depth and image sizes differ for " + tag);
        cv::Mat df(d16.rows, d16.cols, CV_32FC1);
        for (int i = 0; i < d16.rows; ++i) {
          for (int j = 0; j < d16.cols; ++j) {
            const std::uint16_t raw_d = d16.at<std::uint16_t>(i, j);
            const double m = raw_d / options.depth_units_per_m;
            df.at<float>(i, j) = raw_d == options.depth_invalid
                                     ? 0.f
                                     : static_cast<float>(std::min(m, options.depth_max_m) /
                                                          options.depth_max_m);
          }
        }
        df = ResizeBilinear(df, height, width);
        for (int i = 0; i < height; ++i) {
          for (int j = 0; j < width; ++j) {
            s.image.at(0, 3, i, j) = std::clamp(df.at<float>(i, j), 0.f, 1.f);
          }
        }
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

void WriteDataset(const fs::path& root, const std::vector<PanoramaSample>& samples,
                  const DatasetOptions& options) {
  fs::create_directories(root);
  ClassTable table{DefaultClassNames(), 255};
  WriteClassTable(root / "classes.json", table);
  for (const auto& s : samples) {
    const fs::path area = root / fmt::format("area_{}", s.area_id);
    fs::create_directories(area / "rgb");
    fs::create_directories(area / "semantic");
    const int h = s.height();
    const int w = s.width();
    cv::Mat bgr(h, w, CV_8UC3);
    cv::Mat sem(h, w, CV_8UC1);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        cv::Vec3b& p = bgr.at<cv::Vec3b>(i, j);
        for (int c = 0; c < 3; ++c) {
          p[2 - c] = cv::saturate_cast<std::uint8_t>(std::lround(s.image.at(0, c, i, j) * 255.0));
        }
        const std::int32_t l = s.labels.at(i, j);
        sem.at<std::uint8_t>(i, j) =
            static_cast<std::uint8_t>(l == kIgnoreLabel ? table.ignore_value : l);
      }
    }
    const std::string file = s.sample_id + ".png";
    bool ok = cv::imwrite((area / "rgb" / file).string(), bgr) &&
              cv::imwrite((area / "semantic" / file).string(), sem);
    if (s.image.c() == 4) {
      fs::create_directories(area / "depth");
      cv::Mat d16(h, w, CV_16UC1);
      const double scale = options.depth_max_m * options.depth_units_per_m;
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          d16.at<std::uint16_t>(i, j) =
              cv::saturate_cast<std::uint16_t>(std::lround(s.image.at(0, 3, i, j) * scale));
        }
      }
      ok = ok && cv::imwrite((area / "depth" / file).string(), d16);
    }
    if (!ok) throw DatasetError("failed to write sample " + s.sample_id + " under " + root.string());
  }
}

std::vector<PanoramaSample> SynthPanorama(int n_samples, int height, int width, int n_classes,
                                          std::uint64_t rng_seed, Modality modality) {
  Require(n_samples > 0, "synthetic corpus needs at least one sample");
  Require(n_classes >= 1 && n_classes <= 13, "synthetic corpus supports 1..13 classes");
  Require(height >= 8 && width == 2 * height, "W must equal 2H");

  // Band classes ceiling, wall, floor; the remaining classes are objects.
  std::array<int, 3> bands{0, 1, 2};
  if (n_classes == 13) bands = {3, 11, 8};
  for (int& b : bands) b = std::min(b, n_classes - 1);
  std::vector<int> objects;
  for (int c = 0; c < n_classes; ++c) {
    if (std::find(bands.begin(), bands.end(), c) == bands.end()) objects.push_back(c);
  }
  const int n_obj = static_cast<int>(objects.size());
  const int per_sample =
      n_obj == 0 ? 0 : std::max(3, (n_obj + n_samples - 1) / n_samples);

  const int channels = ChannelCount(modality);
  std::vector<PanoramaSample> corpus;
  corpus.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    std::mt19937_64 rng(SampleSeed(rng_seed, static_cast<std::uint64_t>(s)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.04);

    PanoramaSample sample;
    sample.area_id = 1 + s % 6;
    sample.sample_id = fmt::format("synth_{:04d}", s);
    sample.labels = LabelMap(height, width);
    LabelMap& lab = sample.labels;

    // Periodic horizon lines keep the scene continuous across the seam.
    const double top_base = (0.22 + 0.08 * u(rng)) * height;
    const double bot_base = (0.68 + 0.08 * u(rng)) * height;
    const double amp = (0.02 + 0.05 * u(rng)) * height;
    const double phase = 2.0 * std::numbers::pi * u(rng);
    const int freq = 1 + static_cast<int>(u(rng) * 3);
    for (int j = 0; j < width; ++j) {
      const double wave = amp * std::sin(2.0 * std::numbers::pi * freq * j / width + phase);
      const int top = static_cast<int>(std::lround(top_base + wave));
      const int bot = static_cast<int>(std::lround(bot_base - wave));
      for (int i = 0; i < height; ++i) {
        lab.at(i, j) = i < top ? bands[0] : (i < bot ? bands[1] : bands[2]);
      }
    }

    // One object per horizontal sector so objects never overlap.
    const int sector_w = per_sample > 0 ? width / per_sample : width;
    const int offset = static_cast<int>(u(rng) * width);
    for (int k = 0; k < per_sample; ++k) {
      const int slot = s * per_sample + k;
      const int cls = slot < n_obj ? objects[slot]
                                   : objects[static_cast<std::size_t>(u(rng) * n_obj) % n_obj];
      const int ow = std::max(2, static_cast<int>((0.45 + 0.4 * u(rng)) * sector_w));
      const int oh = std::max(2, static_cast<int>((0.15 + 0.3 * u(rng)) * height));
      const int top = static_cast<int>((0.12 + 0.4 * u(rng)) * height);
      const int left = offset + k * sector_w + static_cast<int>(u(rng) * (sector_w - ow));
      for (int i = top; i < std::min(height, top + oh); ++i) {
        for (int jj = 0; jj < ow; ++jj) lab.at(i, (left + jj) % width) = cls;
      }
    }

    sample.image = Tensor<float>(Shape{1, channels, height, width});
    for (int i = 0; i < height; ++i) {
      const double lat = std::abs((i + 0.5) / height - 0.5) * 2.0;
      for (int j = 0; j < width; ++j) {
        const int c = lab.at(i, j);
        const Rgb8& col = kClassPalette[c];
        for (int ch = 0; ch < 3; ++ch) {
          sample.image.at(0, ch, i, j) =
              static_cast<float>(std::clamp(col[ch] / 255.0 + noise(rng), 0.0, 1.0));
        }
        if (channels == 4) {
          const bool band = std::find(bands.begin(), bands.end(), c) != bands.end();
          const double d = band ? 0.9 - 0.6 * lat : 0.2 + 0.04 * (c % 10);
          sample.image.at(0, 3, i, j) = static_cast<float>(std::clamp(d + noise(rng), 0.0, 1.0));
        }
      }
    }
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace bicompress
