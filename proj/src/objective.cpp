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

#include "bicompress/objective.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace bicompress {

namespace {

constexpr double kProbabilityFloor = 1e-12;

// Softmax over the class axis at pixel p of image n, written to `prob`.
template <typename T>
void PixelSoftmax(const Tensor<T>& logits, int n, std::size_t p, std::vector<double>& prob) {
  const int k = logits.c();
  const std::size_t plane = logits.shape().plane();
  const T* base = logits.plane(n, 0) + p;
  double mx = base[0];
  for (int c = 1; c < k; ++c) mx = std::max<double>(mx, base[c * plane]);
  double sum = 0;
  for (int c = 0; c < k; ++c) {
    prob[c] = std::exp(static_cast<double>(base[c * plane]) - mx);
    sum += prob[c];
  }
  for (int c = 0; c < k; ++c) prob[c] /= sum;
}

void CheckLabels(const Shape& s, std::span<const LabelMap> labels) {
  Require(static_cast<int>(labels.size()) == s.n,
          "expected " + std::to_string(s.n) + " label maps, got " + std::to_string(labels.size()));
  for (const auto& l : labels) {
    Require(l.height == s.h && l.width == s.w,
            "label map " + std::to_string(l.height) + "x" + std::to_string(l.width) +
                " does not match logits " + s.str());
  }
}

}  // namespace

std::string ToString(ClassWeightMode mode) {
  return mode == ClassWeightMode::kMedianFrequency ? "median_frequency" : "uniform";
}

ClassWeightMode ParseClassWeightMode(const std::string& name) {
  if (name == "median_frequency") return ClassWeightMode::kMedianFrequency;
  if (name == "uniform") return ClassWeightMode::kUniform;
  throw InvalidArgument("unknown class weight mode '" + name + "'");
}

void ObjectiveConfig::Validate() const {
  Require(alpha >= 0 && beta >= 0 && gamma >= 0, "alpha, beta and gamma must be non-negative");
  for (double w : class_weights) Require(w > 0, "class weights must be positive");
}

std::vector<double> ClassWeights(std::span<const LabelMap> corpus, int n_classes) {
  Require(!corpus.empty(), "class weights need a non-empty corpus");
  std::vector<std::int64_t> counts(n_classes, 0);
  std::int64_t total = 0;
  for (const auto& labels : corpus) {
    for (std::int32_t v : labels.data) {
      if (v == kIgnoreLabel) continue;
      Require(v >= 0 && v < n_classes, "label " + std::to_string(v) + " out of range");
      ++counts[v];
      ++total;
    }
  }
  if (total == 0) throw InvalidArgument("class weights: corpus contains only IGNORE pixels");
  std::vector<double> present;
  for (auto c : counts) {
    if (c > 0) present.push_back(static_cast<double>(c) / total);
  }
  std::sort(present.begin(), present.end());
  const std::size_t m = present.size();
  const double median = m % 2 == 1 ? present[m / 2] : 0.5 * (present[m / 2 - 1] + present[m / 2]);
  std::vector<double> weights(n_classes, 0.0);
  double max_weight = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) continue;
    weights[c] = median / (static_cast<double>(counts[c]) / total);
    max_weight = std::max(max_weight, weights[c]);
  }
  for (int c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) weights[c] = max_weight;
  }
  return weights;
}

template <typename T>
Var<T> LossCe(const Var<T>& logits, std::span<const LabelMap> labels,
              std::span<const double> class_weights) {
  const Shape& s = logits.shape();
  CheckLabels(s, labels);
  Require(static_cast<int>(class_weights.size()) == s.c,
          "expected " + std::to_string(s.c) + " class weights, got " +
              std::to_string(class_weights.size()));
  const std::size_t plane = s.plane();

  std::vector<double> norm(s.n, 0.0);
  int images = 0;
  for (int n = 0; n < s.n; ++n) {
    for (std::int32_t g : labels[n].data) {
      if (g == kIgnoreLabel) continue;
      Require(g >= 0 && g < s.c, "label " + std::to_string(g) + " out of range");
      norm[n] += class_weights[g];
    }
    if (norm[n] > 0) ++images;
  }
  if (images == 0) throw InvalidArgument("cross-entropy over zero non-ignored pixels");

  std::vector<double> prob(s.c);
  Tensor<T> grad(s);
  double loss = 0;
  for (int n = 0; n < s.n; ++n) {
    if (norm[n] <= 0) continue;
    const double scale = 1.0 / (norm[n] * images);
    double acc = 0;
    for (std::size_t p = 0; p < plane; ++p) {
      const std::int32_t g = labels[n].data[p];
      if (g == kIgnoreLabel) continue;
      PixelSoftmax(logits.value(), n, p, prob);
      const double w = class_weights[g];
      acc += -w * std::log(std::max(prob[g], 1e-300));
      T* gbase = grad.plane(n, 0) + p;
      for (int c = 0; c < s.c; ++c) {
        gbase[c * plane] = static_cast<T>(scale * w * (prob[c] - (c == g ? 1.0 : 0.0)));
      }
    }
    loss += acc * scale;
  }
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(loss)), {logits},
                       [grad = std::move(grad)](Node<T>& self) {
                         auto& g = self.parents[0]->grad_buffer();
                         const T seed = self.grad[0];
                         for (std::size_t i = 0; i < g.numel(); ++i) g[i] += seed * grad[i];
                       });
}

template <typename T>
Var<T> LossKl(const Var<T>& student_logits, const Var<T>& teacher_logits,
              std::span<const LabelMap> labels) {
  const Shape& s = student_logits.shape();
  Require(s == teacher_logits.shape(), "KL shape mismatch: " + s.str() + " vs " +
                                           teacher_logits.shape().str());
  if (!labels.empty()) CheckLabels(s, labels);
  const std::size_t plane = s.plane();
  auto valid = [&](int n, std::size_t p) {
    return labels.empty() || labels[n].data[p] != kIgnoreLabel;
  };

  std::vector<std::size_t> count(s.n, 0);
  int images = 0;
  for (int n = 0; n < s.n; ++n) {
    for (std::size_t p = 0; p < plane; ++p) count[n] += valid(n, p) ? 1 : 0;
    if (count[n] > 0) ++images;
  }
  Tensor<T> grad(s);
  double loss = 0;
  if (images > 0) {
    std::vector<double> ps(s.c), pt(s.c);
    for (int n = 0; n < s.n; ++n) {
      if (count[n] == 0) continue;
      const double scale = 1.0 / (static_cast<double>(count[n]) * images);
      double acc = 0;
      for (std::size_t p = 0; p < plane; ++p) {
        if (!valid(n, p)) continue;
        PixelSoftmax(student_logits.value(), n, p, ps);
        PixelSoftmax(teacher_logits.value(), n, p, pt);
        double active_mass = 0;
        for (int c = 0; c < s.c; ++c) {
          const double lt = std::log(std::max(pt[c], kProbabilityFloor));
          const double ls = std::log(std::max(ps[c], kProbabilityFloor));
          acc += pt[c] * (lt - ls);
          if (ps[c] > kProbabilityFloor) active_mass += pt[c];
        }
        T* gbase = grad.plane(n, 0) + p;
        for (int c = 0; c < s.c; ++c) {
          const double direct = ps[c] > kProbabilityFloor ? pt[c] : 0.0;
          gbase[c * plane] = static_cast<T>(scale * (ps[c] * active_mass - direct));
        }
      }
      loss += acc * scale;
    }
  }
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(loss)), {student_logits},
                       [grad = std::move(grad)](Node<T>& self) {
                         auto& g = self.parents[0]->grad_buffer();
                         const T seed = self.grad[0];
                         for (std::size_t i = 0; i < g.numel(); ++i) g[i] += seed * grad[i];
                       });
}

template <typename T>
Var<T> LossL2(const Var<T>& student_feature, const Var<T>& teacher_feature) {
  Require(student_feature.shape() == teacher_feature.shape(),
          "L2 shape mismatch: " + student_feature.shape().str() + " vs " +
              teacher_feature.shape().str());
  const auto& a = student_feature.value();
  const auto& b = teacher_feature.value();
  const std::size_t m = a.numel();
  Require(m > 0, "L2 over empty features");
  double acc = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return MakeResult<T>(Tensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(acc / m)), {student_feature},
                       [teacher = b, m](Node<T>& self) {
                         auto& g = self.parents[0]->grad_buffer();
                         const auto& a = self.parents[0]->value;
                         const T scale = self.grad[0] * T(2) / static_cast<T>(m);
                         for (std::size_t i = 0; i < m; ++i) g[i] += scale * (a[i] - teacher[i]);
                       });
}

LossReport CombineTerms(const LossTerms& terms, const ObjectiveConfig& config) {
  LossReport r;
  r.ce = terms.ce;
  r.kl = terms.kl;
  r.l2 = terms.l2;
  Require(terms.ce.count(Branch::kEb), "loss terms lack the EB cross-entropy");
  r.base = terms.ce.at(Branch::kEb);
  r.distill = 0;
  for (Branch s : kStudentBranches) {
    Require(terms.ce.count(s) && terms.kl.count(s) && terms.l2.count(s),
            "loss terms lack branch " + ToString(s));
    r.distill += config.alpha * terms.ce.at(s) + config.beta * terms.kl.at(s) +
                 config.gamma * terms.l2.at(s);
  }
  r.total = r.base + r.distill;
  return r;
}

template <typename T>
LossResult<T> TotalLoss(const std::map<Branch, BranchOutputs<T>>& outputs,
                        std::span<const LabelMap> labels, const ObjectiveConfig& config) {
  config.Validate();
  for (Branch b : kAllBranches) {
    Require(outputs.count(b) != 0, "total loss needs the " + ToString(b) + " branch");
  }
  const auto& teacher = outputs.at(Branch::kEb);
  std::vector<double> weights = config.class_weights;
  if (weights.empty()) weights.assign(teacher.logits.shape().c, 1.0);

  LossTerms terms;
  std::vector<Var<T>> parts;
  std::vector<T> coeffs;
  Var<T> ce_eb = LossCe(teacher.logits, labels, weights);
  terms.ce[Branch::kEb] = ScalarValue(ce_eb);
  parts.push_back(ce_eb);
  coeffs.push_back(T(1));

  const Var<T> teacher_logits = Detach(teacher.logits);
  const Var<T> teacher_feature = Detach(teacher.bottleneck);
  for (Branch s : kStudentBranches) {
    const auto& student = outputs.at(s);
    Var<T> ce, kl, l2;
    {
      // Terms with zero weight are reported but kept off the tape.
      std::optional<NoGradGuard> guard;
      if (config.alpha == 0) guard.emplace();
      ce = LossCe(student.logits, labels, weights);
    }
    {
      std::optional<NoGradGuard> guard;
      if (config.beta == 0) guard.emplace();
      kl = LossKl(student.logits, teacher_logits, labels);
    }
    {
      std::optional<NoGradGuard> guard;
      if (config.gamma == 0) guard.emplace();
      l2 = LossL2(student.bottleneck, teacher_feature);
    }
    terms.ce[s] = ScalarValue(ce);
    terms.kl[s] = ScalarValue(kl);
    terms.l2[s] = ScalarValue(l2);
    const std::array<std::pair<Var<T>, double>, 3> weighted{
        std::pair{ce, config.alpha}, std::pair{kl, config.beta}, std::pair{l2, config.gamma}};
    for (const auto& [v, c] : weighted) {
      if (c == 0) continue;
      parts.push_back(v);
      coeffs.push_back(static_cast<T>(c));
    }
  }
  LossResult<T> result;
  result.report = CombineTerms(terms, config);
  result.total = LinearCombination<T>(parts, coeffs);
  return result;
}

void ScheduleConfig::Validate() const {
  Require(base_lr > 0, "base_lr must be positive");
  Require(max_iter > 0, "max_iter must be positive");
}

double PolyLr(const ScheduleConfig& config, int iter) {
  config.Validate();
  Require(iter >= 0, "iteration must be non-negative");
  Require(iter <= config.max_iter, "iteration " + std::to_string(iter) + " exceeds max_iter " +
                                       std::to_string(config.max_iter));
  const double frac = 1.0 - static_cast<double>(iter) / config.max_iter;
  return config.base_lr * std::pow(frac, config.power);
}

template <typename T>
void Adam<T>::Step(ParamStore<T>& params, double lr) {
  ++steps_;
  for (auto& [name, var] : params.params()) {
    if (!var.has_grad()) continue;
    auto& st = state_[name];
    Tensor<T>& value = var.mutable_value();
    const Tensor<T>& grad = var.grad();
    if (st.m.empty()) {
      st.m = Tensor<T>(value.shape());
      st.v = Tensor<T>(value.shape());
    }
    ++st.step;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(st.step));
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(config_.epsilon);
    for (std::size_t i = 0; i < value.numel(); ++i) {
      const T g = grad[i];
      st.m[i] = b1 * st.m[i] + (T(1) - b1) * g;
      st.v[i] = b2 * st.v[i] + (T(1) - b2) * g * g;
      value[i] -= step_size * st.m[i] / (std::sqrt(st.v[i] * inv_bc2) + eps);
    }
  }
}

#define BICOMPRESS_INSTANTIATE(T)                                                          \
  template Var<T> LossCe<T>(const Var<T>&, std::span<const LabelMap>, std::span<const double>); \
  template Var<T> LossKl<T>(const Var<T>&, const Var<T>&, std::span<const LabelMap>);      \
  template Var<T> LossL2<T>(const Var<T>&, const Var<T>&);                                 \
  template LossResult<T> TotalLoss<T>(const std::map<Branch, BranchOutputs<T>>&,           \
                                      std::span<const LabelMap>, const ObjectiveConfig&);  \
  template class Adam<T>;

BICOMPRESS_INSTANTIATE(float)
BICOMPRESS_INSTANTIATE(double)
#undef BICOMPRESS_INSTANTIATE

}  // namespace bicompress
