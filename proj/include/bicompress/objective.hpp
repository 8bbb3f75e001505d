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

#ifndef BICOMPRESS_OBJECTIVE_HPP_
#define BICOMPRESS_OBJECTIVE_HPP_

// Training objective for the three-branch self-distillation setup.
//
//   L_total = L_b + L_s
//   L_b     = CE(EB)
//   L_s     = sum over students s in {HDB, VDB} of
//             alpha * CE(s) + beta * KL(p_EB || p_s) + gamma * L2(f_s, f_EB)
//
// The teacher (EB) enters KL and L2 as a constant: its head only learns from
// the labels, while students still shape the shared trunk.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bicompress/autograd.hpp"
#include "bicompress/decoder.hpp"
#include "bicompress/labels.hpp"
#include "bicompress/nn.hpp"

namespace bicompress {

enum class ClassWeightMode { kMedianFrequency, kUniform };

std::string ToString(ClassWeightMode mode);
ClassWeightMode ParseClassWeightMode(const std::string& name);

struct ObjectiveConfig {
  double alpha = 0.7;
  double beta = 0.3;
  double gamma = 0.003;
  ClassWeightMode weight_mode = ClassWeightMode::kMedianFrequency;
  std::vector<double> class_weights;  // empty: computed from the training corpus

  void Validate() const;
};

// Median-frequency balancing: w_c = median(f) / f_c over classes present in
// the corpus (IGNORE excluded); absent classes get the largest present weight.
std::vector<double> ClassWeights(std::span<const LabelMap> corpus, int n_classes);

// Per image: sum_p w[g_p] * -log softmax(z_p)[g_p] / sum_p w[g_p] over
// non-ignored pixels; then the mean over images that have valid pixels.
template <typename T>
Var<T> LossCe(const Var<T>& logits, std::span<const LabelMap> labels,
              std::span<const double> class_weights);

// Per pixel KL(p_teacher || p_student) over the class axis, probabilities
// floored at 1e-12 before the log, mean over non-ignored pixels per image,
// then over the batch. The teacher is treated as a constant. An empty label
// span means every pixel is valid.
template <typename T>
Var<T> LossKl(const Var<T>& student_logits, const Var<T>& teacher_logits,
              std::span<const LabelMap> labels = {});

// Mean squared difference over all elements; the teacher is a constant.
template <typename T>
Var<T> LossL2(const Var<T>& student_feature, const Var<T>& teacher_feature);

struct LossReport {
  std::map<Branch, double> ce;
  std::map<Branch, double> kl;
  std::map<Branch, double> l2;
  double base = 0;
  double distill = 0;
  double total = 0;
};

// Scalar loss terms of one step, before weighting.
struct LossTerms {
  std::map<Branch, double> ce;
  std::map<Branch, double> kl;
  std::map<Branch, double> l2;
};

LossReport CombineTerms(const LossTerms& terms, const ObjectiveConfig& config);

template <typename T>
struct LossResult {
  Var<T> total;
  LossReport report;
};

template <typename T>
LossResult<T> TotalLoss(const std::map<Branch, BranchOutputs<T>>& outputs,
                        std::span<const LabelMap> labels, const ObjectiveConfig& config);

struct ScheduleConfig {
  double base_lr = 1e-3;
  int max_iter = 300;
  double power = 0.9;

  void Validate() const;
};

// base_lr * (1 - iter / max_iter)^power for 0 <= iter <= max_iter.
double PolyLr(const ScheduleConfig& config, int iter);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam without weight decay. Parameters that received no gradient in a step
// are left untouched.
template <typename T>
class Adam {
 public:
  struct Moments {
    Tensor<T> m;
    Tensor<T> v;
    std::int64_t step = 0;
  };

  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void Step(ParamStore<T>& params, double lr);

  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t steps) { steps_ = steps; }
  std::map<std::string, Moments>& state() { return state_; }
  const std::map<std::string, Moments>& state() const { return state_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace bicompress

#endif  // BICOMPRESS_OBJECTIVE_HPP_
