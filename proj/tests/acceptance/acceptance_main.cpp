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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments restrict the
// run to the listed criterion ids (e.g. "acceptance 2 7"); "--report PATH"
// also writes the lines to a file. Exit status is
// non-zero when any selected gating criterion fails; criterion 9 is a trend
// check and reports its verdict without gating.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bicompress/compress.hpp"
#include "bicompress/config.hpp"
#include "bicompress/encoder.hpp"
#include "bicompress/equirect_ops.hpp"
#include "bicompress/metrics.hpp"
#include "bicompress/network.hpp"
#include "bicompress/objective.hpp"
#include "bicompress/pano_data.hpp"
#include "bicompress/trainer.hpp"
#include "test_util.hpp"

namespace bicompress {
namespace {

using testing::GradientError;
using testing::RandomLabels;
using testing::RandomTensor;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// 1. Branch count, logit shapes and mode-independence of the EB head.
Outcome ShapeSuite() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (int h : {64, 256}) {
    NetworkConfig c;
    c.height = h;
    c.width = 2 * h;
    Network<float> net(c, 1);
    const Tensor<float> x = RandomTensor<float>({1, 4, h, 2 * h}, 2, 0, 1);
    NoGradGuard no_grad;
    const auto train = net.Forward(x, ForwardOptions::Train());
    const auto heads = net.Forward(x, {true, false});
    const auto eval = net.Forward(x, ForwardOptions::Eval());
    bool shapes = train.branches.size() == 3 && eval.branches.size() == 1 &&
                  eval.branches.count(Branch::kEb) == 1;
    for (const auto& [b, o] : train.branches) {
      shapes = shapes && o.logits.shape() == Shape{1, 13, h, 2 * h};
    }
    const double diff = MaxAbsDiff(heads.branches.at(Branch::kEb).logits.value(),
                                   eval.branches.at(Branch::kEb).logits.value());
    ok = ok && shapes && diff == 0.0;
    detail += fmt::format("{}x{}: train {} eval {} eb_diff {:g}; ", h, 2 * h,
                          train.branches.size(), eval.branches.size(), diff);
  }
  const double t = Seconds(start);
  detail += fmt::format("runtime {:.1f}s (limit 60s)", t);
  return {ok && t < 60.0, detail};
}

// Brute-force PPC: explicit window means, explicit collapse kernels, 1x1
// fuse and inference-mode batch norm followed by ReLU.
Tensor<double> PpcOracle(const Tensor<double>& x, const PpcSchedule& sched,
                         ParamStore<double>& store, const std::string& name) {
  const bool horiz = sched.direction == Direction::kHorizontal;
  const int n = x.n(), c = x.c(), h = x.h(), w = x.w();
  const int kept = horiz ? w : h;
  std::vector<Tensor<double>> rows;
  for (int bins : sched.levels) {
    const std::string lvl = name + ".level" + std::to_string(bins);
    const Tensor<double>& kw = store.param(lvl + ".weight").value();
    const Tensor<double>& kb = store.param(lvl + ".bias").value();
    const int win = (horiz ? h : w) / bins;
    Tensor<double> out(horiz ? Shape{n, c, 1, w} : Shape{n, c, h, 1});
    for (int b = 0; b < n; ++b)
      for (int o = 0; o < c; ++o)
        for (int p = 0; p < kept; ++p) {
          double acc = kb.at(0, o, 0, 0);
          for (int ci = 0; ci < c; ++ci)
            for (int k = 0; k < bins; ++k) {
              double mean = 0;
              for (int t = 0; t < win; ++t) {
                mean += horiz ? x.at(b, ci, k * win + t, p) : x.at(b, ci, p, k * win + t);
              }
              mean /= win;
              acc += (horiz ? kw.at(o, ci, k, 0) : kw.at(o, ci, 0, k)) * mean;
            }
          if (horiz) out.at(b, o, 0, p) = acc; else out.at(b, o, p, 0) = acc;
        }
    rows.push_back(std::move(out));
  }
  const Tensor<double>& fw = store.param(name + ".fuse.conv.weight").value();
  const bool has_bias = store.has_param(name + ".fuse.conv.bias");
  const Tensor<double>& gamma = store.param(name + ".fuse.bn.gamma").value();
  const Tensor<double>& beta = store.param(name + ".fuse.bn.beta").value();
  const Tensor<double>& mean = store.buffer(name + ".fuse.bn.running_mean");
  const Tensor<double>& var = store.buffer(name + ".fuse.bn.running_var");
  const int cs = fw.n();
  Tensor<double> y(horiz ? Shape{n, cs, 1, w} : Shape{n, cs, h, 1});
  for (int b = 0; b < n; ++b)
    for (int o = 0; o < cs; ++o)
      for (int p = 0; p < kept; ++p) {
        double z = has_bias ? store.param(name + ".fuse.conv.bias").value().at(0, o, 0, 0) : 0.0;
        for (std::size_t l = 0; l < rows.size(); ++l)
          for (int ci = 0; ci < c; ++ci) {
            const double v = horiz ? rows[l].at(b, ci, 0, p) : rows[l].at(b, ci, p, 0);
            z += fw.at(o, static_cast<int>(l) * c + ci, 0, 0) * v;
          }
        z = (z - mean.at(0, o, 0, 0)) / std::sqrt(var.at(0, o, 0, 0) + 1e-5) * gamma.at(0, o, 0, 0) +
            beta.at(0, o, 0, 0);
        z = std::max(z, 0.0);
        if (horiz) y.at(b, o, 0, p) = z; else y.at(b, o, p, 0) = z;
      }
  return y;
}

// 2. PPC against the oracle at every stage of a 64x128 pyramid.
Outcome PpcOracleEquivalence() {
  const bool schedules =
      MakePpcSchedule(1, Direction::kHorizontal).levels == std::vector<int>{1, 2, 4, 8} &&
      MakePpcSchedule(4, Direction::kVertical).levels == std::vector<int>{1, 2};
  double worst = 0;
  std::uint64_t seed = 100;
  for (int stage = 1; stage <= 4; ++stage) {
    for (Direction d : {Direction::kHorizontal, Direction::kVertical}) {
      ParamStore<double> store(seed++);
      const std::string name = "ppc";
      PpcCompress<double> ppc(store, name, MakePpcSchedule(stage, d), 4, 3);
      std::mt19937_64 rng(seed++);
      std::uniform_real_distribution<double> u(-1, 1), pos(0.5, 2.0);
      for (auto& [pname, p] : store.params())
        for (double& v : p.mutable_value().span()) v = u(rng);
      for (auto& [bname, b] : store.buffers())
        for (double& v : b.span()) v = bname.ends_with("running_var") ? pos(rng) : u(rng);
      const int h = 16 >> (stage - 1);
      const Tensor<double> x = RandomTensor<double>({2, 4, h, 2 * h}, seed++, -1, 1);
      const Tensor<double> got = ppc(Var<double>::Constant(x), false).data.value();
      const Tensor<double> want = PpcOracle(x, ppc.schedule(), store, name);
      worst = std::max(worst, static_cast<double>(MaxAbsDiff(got, want)));
    }
  }
  return {schedules && worst <= 1e-6,
          fmt::format("max abs diff {:.3g} over 4 stages x 2 directions (tol 1e-6); "
                      "schedules h1=[1,2,4,8] v4=[1,2] {}",
                      worst, schedules ? "match" : "MISMATCH")};
}

// 3. Central finite differences in double precision.
Outcome GradientChecks() {
  const auto start = Clock::now();
  std::vector<LabelMap> labels;
  for (int i = 0; i < 2; ++i) labels.push_back(RandomLabels(4, 4, 3, 20 + i, 0.2));
  const std::vector<double> w{0.5, 1.0, 2.0};
  const auto teacher = Var<double>::Constant(RandomTensor<double>({2, 3, 4, 4}, 7, -2, 2));
  const auto target = Var<double>::Constant(RandomTensor<double>({2, 3, 4, 4}, 8));
  const auto x = RandomTensor<double>({2, 3, 4, 4}, 9, -2, 2);
  std::map<std::string, double> err;
  err["ce"] = GradientError([&](const Var<double>& z) { return LossCe(z, labels, w); }, x);
  err["kl"] = GradientError([&](const Var<double>& z) { return LossKl(z, teacher, labels); }, x);
  err["l2"] = GradientError([&](const Var<double>& z) { return LossL2(z, target); }, x);

  ParamStore<double> store(30);
  BiCompression<double> bc(store, "compress", {3, 2, 2});
  FeaturePyramid<double> pyr;
  for (int i = 0; i < 4; ++i) {
    const int s = 4 << i;
    pyr.levels[i] = Var<double>::Constant(RandomTensor<double>({2, 3, 32 / s, 64 / s}, 40 + i));
  }
  const Tensor<double> wsum = RandomTensor<double>({2, 8, 1, 16}, 50);
  double seq = 0;
  for (int i = 0; i < 4; ++i) {
    const Tensor<double> x0 = pyr.levels[i].value();
    seq = std::max(seq, GradientError(
                            [&](const Var<double>& v) {
                              FeaturePyramid<double> p = pyr;
                              p.levels[i] = v;
                              return WeightedSum(bc(p, true).horizontal.data, wsum);
                            },
                            x0));
  }
  err["s_eqh"] = seq;
  bool ok = true;
  std::string detail;
  for (const auto& [k, e] : err) {
    ok = ok && e < 1e-4;
    detail += fmt::format("{} {:.2e}; ", k, e);
  }
  const double t = Seconds(start);
  detail += fmt::format("relative error tol 1e-4, runtime {:.1f}s (limit 120s)", t);
  return {ok && t < 120.0, detail};
}

NetworkConfig TinyNet() {
  NetworkConfig c;
  c.height = 32;
  c.width = 64;
  c.n_classes = 5;
  c.encoder.c_fpn = 8;
  c.encoder.input_channels = 3;
  c.encoder.widths = {8, 8, 8, 8};
  c.c_b = 4;
  return c;
}

// 4. Weighted sum on the hand case, the zero-weight limit and teacher isolation.
Outcome ObjectiveAlgebra() {
  LossTerms t;
  t.ce = {{Branch::kEb, 1.0}, {Branch::kHdb, 2.0}, {Branch::kVdb, 2.0}};
  t.kl = {{Branch::kHdb, 0.5}, {Branch::kVdb, 0.5}};
  t.l2 = {{Branch::kHdb, 10.0}, {Branch::kVdb, 10.0}};
  const double hand = CombineTerms(t, ObjectiveConfig{}).total;

  Network<double> net(TinyNet(), 4);
  const auto out = net.Forward(RandomTensor<double>({2, 3, 32, 64}, 5, 0, 1), ForwardOptions::Train());
  std::vector<LabelMap> labels;
  for (int i = 0; i < 2; ++i) labels.push_back(RandomLabels(32, 64, 5, 6 + i, 0.1));
  const std::vector<double> unit(5, 1.0);
  ObjectiveConfig zero;
  zero.alpha = zero.beta = zero.gamma = 0;
  const double total0 = TotalLoss<double>(out.branches, labels, zero).total.value()[0];
  const Var<double> ce_eb = LossCe(out.branches.at(Branch::kEb).logits, labels, unit);
  const bool zero_ok = total0 == ce_eb.value()[0];

  ObjectiveConfig distill;
  distill.alpha = 0;
  const auto loss = TotalLoss<double>(out.branches, labels, distill);
  const std::array<Var<double>, 2> parts{loss.total, ce_eb};
  const std::array<double, 2> k{1.0, -1.0};
  Backward(LinearCombination<double>(parts, k));
  double teacher_grad = 0;
  bool student_moved = false;
  for (const auto& [name, var] : net.params().params()) {
    if (!var.has_grad()) continue;
    for (double g : var.grad().span()) {
      if (name.starts_with("head.eb.")) teacher_grad = std::max(teacher_grad, std::abs(g));
      if (name.starts_with("head.hdb.")) student_moved = student_moved || g != 0.0;
    }
  }
  return {hand == 4.16 && zero_ok && teacher_grad == 0.0 && student_moved,
          fmt::format("hand case {:.17g} (want 4.16 exactly); zero weights total {:.17g} vs "
                      "CE(EB) {:.17g}; max |teacher grad| {:g}, students updated {}",
                      hand, total0, ce_eb.value()[0], teacher_grad, student_moved)};
}

// 5. Poly schedule endpoints and midpoint.
Outcome PolyEndpoints() {
  const ScheduleConfig s{1e-3, 300, 0.9};
  const double a = PolyLr(s, 0), b = PolyLr(s, 300), m = PolyLr(s, 150);
  return {a == 1e-3 && b == 0.0 && std::abs(m - 5.3589e-4) <= 1e-8,
          fmt::format("lr(0) {:g}, lr(300) {:g}, lr(150) {:.8e} (want 5.3589e-4 +- 1e-8)", a, b, m)};
}

// 6. Seam shift commutes with the small-encoder pyramid.
Outcome ShiftEquivariance() {
  ParamStore<float> store(60);
  Encoder<float> enc(store, "encoder", EncoderConfig{});
  for (auto& [name, b] : store.buffers()) {
    std::mt19937_64 rng(std::hash<std::string>{}(name));
    std::uniform_real_distribution<float> u(0.5f, 1.5f);
    for (float& v : b.span()) v = name.ends_with("running_var") ? u(rng) : u(rng) - 1.0f;
  }
  const Tensor<float> x = RandomTensor<float>({1, 4, 64, 128}, 61, 0, 1);
  NoGradGuard no_grad;
  const auto a = enc(Var<float>::Constant(RollHorizontal(x, 32)), false);
  const auto b = enc(Var<float>::Constant(x), false);
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    const int stride = 4 << i;
    worst = std::max(worst, static_cast<double>(MaxAbsDiff(
                                a.levels[i].value(), RollHorizontal(b.levels[i].value(), 32 / stride))));
  }
  return {worst <= 1e-5, fmt::format("max abs deviation {:.3g} over 4 levels (tol 1e-5)", worst)};
}

// Counts per class straight from the rasters.
SegmentationMetrics BruteForce(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt,
                               int k) {
  SegmentationMetrics m;
  m.per_class.resize(k);
  int present = 0;
  for (int c = 0; c < k; ++c) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < gt.size(); ++r)
      for (std::size_t i = 0; i < gt[r].size(); ++i) {
        const int g = gt[r].data[i], p = pred[r].data[i];
        if (g == kIgnoreLabel) continue;
        tp += g == c && p == c;
        fn += g == c && p != c;
        fp += g != c && p == c;
      }
    ClassMetric& pc = m.per_class[c];
    pc.gt_pixels = tp + fn;
    pc.present = tp + fn > 0;
    if (!pc.present) continue;
    pc.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    pc.acc = static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.miou += pc.iou;
    m.macc += pc.acc;
    ++present;
  }
  m.miou /= present;
  m.macc /= present;
  return m;
}

// 7. Metric counting and fold aggregation.
Outcome MetricsOracle() {
  int mismatches = 0;
  for (int r = 0; r < 100; ++r) {
    const LabelMap gt = RandomLabels(8, 16, 5, 1000 + r, 0.1);
    LabelMap pred = RandomLabels(8, 16, 5, 5000 + r);
    for (std::size_t i = 0; i < pred.size(); i += 2) {
      if (gt.data[i] != kIgnoreLabel) pred.data[i] = gt.data[i];
    }
    ConfusionMatrix cm(5);
    cm.Accumulate(pred, gt);
    const auto got = MiouMacc(cm);
    const auto want = BruteForce({pred}, {gt}, 5);
    bool same = got.miou == want.miou && got.macc == want.macc;
    for (int c = 0; c < 5; ++c) {
      same = same && got.per_class[c].iou == want.per_class[c].iou &&
             got.per_class[c].acc == want.per_class[c].acc &&
             got.per_class[c].present == want.per_class[c].present;
    }
    mismatches += !same;
  }
  const std::vector<FoldResult> folds{{50.48, 0}, {40.87, 0}, {50.35, 0}};
  const double agg = AggregateFolds(folds).miou;
  const bool agg_ok = std::round(agg * 100.0) / 100.0 == 47.23 && std::round(agg * 10.0) / 10.0 == 47.2;
  return {mismatches == 0 && agg_ok,
          fmt::format("{} of 100 rasters differ from brute force; aggregate {:.4f} "
                      "(want 47.23, 47.2 at one decimal)",
                      mismatches, agg)};
}

std::filesystem::path ScratchDir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bicompress_acceptance_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// 8. Overfit surrogate plus the loss-trace invariant of the same run.
std::vector<Outcome> OverfitSurrogate() {
  RunConfig cfg = RunConfigFromJson({{"height", 64},
                                     {"batch_size", 8},
                                     {"seed", 7},
                                     {"fold", 0},
                                     {"synth_samples", 8},
                                     {"synth_seed", 7},
                                     {"mask_enabled", false},
                                     {"validate_every", 0}});
  cfg.output_dir = ScratchDir("overfit").string();
  const auto start = Clock::now();
  const auto corpus = LoadCorpus(cfg);
  const TrainResult r = Train(cfg, corpus, {});
  const double t = Seconds(start);
  const LoadedModel model = ModelFromCheckpoint(r.checkpoint);
  const EvalReport e = Evaluate(*model.network, corpus);

  std::vector<double> loss;
  bool finite = true;
  for (const auto& it : r.iterations) {
    loss.push_back(it.loss.total);
    finite = finite && std::isfinite(it.loss.total);
  }
  constexpr int kWindow = 50;
  const int n = static_cast<int>(loss.size());
  const int from = n - n / 3;
  auto ma = [&](int end) {
    double s = 0;
    for (int i = end - kWindow + 1; i <= end; ++i) s += loss[i];
    return s / kWindow;
  };
  int violations = 0;
  for (int i = std::max(from, kWindow); i < n; ++i) violations += ma(i) > ma(i - 1);

  Outcome crit{e.pixel_accuracy >= 0.90 && e.metrics.miou >= 0.80 && t < 900.0,
               fmt::format("{} epochs, {} steps: pixel acc {:.4f} (>= 0.90), mIoU {:.4f} (>= 0.80), "
                           "{:.0f}s (limit 900s)",
                           cfg.max_iter, n, e.pixel_accuracy, e.metrics.miou, t)};
  Outcome inv{finite && violations == 0,
              fmt::format("loss finite at all {} steps: {}; {}-step moving average increases {} "
                          "times over steps {}..{}",
                          n, finite ? "yes" : "no", kWindow, violations, from, n - 1)};
  return {crit, inv};
}

// 9. Held-out mIoU with and without student supervision over 5 seeds.
Outcome DistillationTrend() {
  constexpr int kSeeds = 5;
  // Low-res preset schedule length.
  constexpr int kEpochs = 300;
  const auto corpus = SynthPanorama(32, 32, 64, 13, 7);
  const std::vector<PanoramaSample> train(corpus.begin(), corpus.begin() + 24);
  const std::vector<PanoramaSample> held(corpus.begin() + 24, corpus.end());
  std::map<Branch, double> with, without;
  for (int s = 1; s <= kSeeds; ++s) {
    for (bool distill : {true, false}) {
      nlohmann::json j{{"height", 32},     {"batch_size", 8}, {"max_iter", kEpochs},
                       {"fold", 0},        {"seed", s},       {"validate_every", 0}};
      if (!distill) {
        j["alpha"] = 0.0;
        j["beta"] = 0.0;
        j["gamma"] = 0.0;
      }
      RunConfig cfg = RunConfigFromJson(j);
      cfg.output_dir = ScratchDir("trend").string();
      const TrainResult r = Train(cfg, train, {});
      const LoadedModel m = ModelFromCheckpoint(r.checkpoint, false);
      for (const auto& [b, rep] : EvaluateBranches(*m.network, held)) {
        (distill ? with : without)[b] += rep.metrics.miou / kSeeds;
      }
    }
  }
  bool ok = with[Branch::kEb] >= without[Branch::kEb] - 0.01;
  std::string detail;
  for (Branch b : {Branch::kEb, Branch::kHdb, Branch::kVdb}) {
    ok = ok && with[b] >= without[b] - 0.02;
    detail += fmt::format("{} w/ {:.4f} w/o {:.4f}; ", ToString(b), with[b], without[b]);
  }
  detail += fmt::format("{} seeds x {} epochs, 24 train / 8 held out; EB margin 0.01, branch "
                        "margin 0.02",
                        kSeeds, kEpochs);
  return {ok, detail};
}

// 10. Kept-axis extents of the two sequences.
Outcome SequenceBudget() {
  bool ok = true;
  std::string detail;
  for (int h : {32, 64, 256, 512}) {
    ParamStore<float> store(70);
    BiCompression<float> bc(store, "compress", {2, 2, 1});
    FeaturePyramid<float> pyr;
    for (int i = 0; i < 4; ++i) {
      const int s = 4 << i;
      pyr.levels[i] = Var<float>::Constant(RandomTensor<float>({1, 2, h / s, 2 * h / s}, 71 + i));
    }
    NoGradGuard no_grad;
    const auto seq = bc(pyr, false);
    const int sum = seq.horizontal.kept_extent() + seq.vertical.kept_extent();
    const bool collapsed = seq.horizontal.data.shape().h == 1 && seq.vertical.data.shape().w == 1;
    ok = ok && collapsed && sum == 2 * h / 4 + h / 4;
    detail += fmt::format("{}x{}: {}+{}={} (want {}); ", h, 2 * h, seq.horizontal.kept_extent(),
                          seq.vertical.kept_extent(), sum, 2 * h / 4 + h / 4);
  }
  return {ok, detail};
}

}  // namespace
}  // namespace bicompress

int main(int argc, char** argv) {
  using namespace bicompress;
  std::set<std::string> only;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      only.insert(a);
    }
  }
  std::string report;
  SetNumericThreads(1);
  const std::vector<std::pair<std::string, std::function<std::vector<Outcome>()>>> criteria{
      {"1", [] { return std::vector<Outcome>{ShapeSuite()}; }},
      {"2", [] { return std::vector<Outcome>{PpcOracleEquivalence()}; }},
      {"3", [] { return std::vector<Outcome>{GradientChecks()}; }},
      {"4", [] { return std::vector<Outcome>{ObjectiveAlgebra()}; }},
      {"5", [] { return std::vector<Outcome>{PolyEndpoints()}; }},
      {"6", [] { return std::vector<Outcome>{ShiftEquivariance()}; }},
      {"7", [] { return std::vector<Outcome>{MetricsOracle()}; }},
      {"8", OverfitSurrogate},
      {"9", [] { return std::vector<Outcome>{DistillationTrend()}; }},
      {"10", [] { return std::vector<Outcome>{SequenceBudget()}; }},
  };
  const std::map<std::string, std::vector<std::string>> titles{
      {"1", {"shape suite"}},
      {"2", {"ppc oracle equivalence"}},
      {"3", {"gradient checks"}},
      {"4", {"objective algebra"}},
      {"5", {"poly lr endpoints"}},
      {"6", {"circular-shift equivariance"}},
      {"7", {"metrics oracle"}},
      {"8", {"overfit surrogate", "overfit loss trace invariant"}},
      {"9", {"self-distillation trend"}},
      {"10", {"sequence-length budget"}},
  };
  const std::set<std::string> non_gating{"9"};
  int failures = 0, soft_failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    std::vector<Outcome> outcomes;
    try {
      outcomes = run();
    } catch (const std::exception& e) {
      outcomes.assign(titles.at(id).size(), Outcome{false, std::string("exception: ") + e.what()});
    }
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const std::string label = k == 0 ? id : id + "b";
      const bool gating = !non_gating.count(id);
      const std::string line =
          fmt::format("[{}] criterion {:<3} {}{}: {}\n", outcomes[k].pass ? "PASS" : "FAIL", label,
                      titles.at(id)[k], gating ? "" : " (trend check, non-gating)", outcomes[k].detail);
      fmt::print("{}", line);
      std::fflush(stdout);
      report += line;
      (gating ? failures : soft_failures) += !outcomes[k].pass;
    }
  }
  const std::string summary =
      fmt::format("{} gating criteria failing, {} non-gating failing\n", failures, soft_failures);
  fmt::print("{}", summary);
  if (!report_path.empty()) std::ofstream(report_path) << report << summary;
  return failures == 0 ? 0 : 1;
}
