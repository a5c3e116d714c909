/*
 * Copyright 2026 The Robustmix Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "robustmix/augment.hpp"
#include "robustmix/dct.hpp"
#include "robustmix/error.hpp"
#include "robustmix/freq_filter.hpp"
#include "robustmix/metrics.hpp"
#include "robustmix/rng.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix::toy {

/// Synthetic classification task with a label-bearing low band and a
/// high-band distractor.
///
/// Every image is   background + P[y] + D[j] + sigma * noise
/// where P[k] is a fixed pattern whose DCT support lies inside the square
/// band below `signal_cutoff` and D[k] is a fixed pattern supported on
/// shells at or above `distractor_cutoff`. Both patterns put the same RMS
/// amplitude on every coefficient of their support (`coefficient_amplitude`,
/// times `distractor_amplitude` for D). The high band is wide, so D can carry
/// more total energy than P even when its coefficients are smaller. In the
/// training split j = y, so the distractor predicts the label as well as the
/// signal does. In the test split j is drawn independently of y and the
/// distractor is spurious.
struct SyntheticSpec {
  std::size_t image_size = 32;
  std::size_t classes = 4;
  double signal_cutoff = 0.25;
  double distractor_cutoff = 0.5;
  double distractor_amplitude = 0.3;  // relative to the signal coefficients
  double coefficient_amplitude = 0.1;
  double background = 0.5;
  double noise_std = 0.05;
  std::size_t train_size = 512;
  std::size_t test_size = 1024;
  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
    if (image_size < 2) fail("image_size must be at least 2");
    if (classes < 2) fail("need at least 2 classes");
    if (!(signal_cutoff > 0.0 && signal_cutoff < 1.0)) fail("signal_cutoff must lie in (0,1)");
    if (!(distractor_cutoff >= signal_cutoff && distractor_cutoff < 1.0)) {
      fail("distractor_cutoff must lie in [signal_cutoff, 1)");
    }
    if (BandMask::keep_count(image_size, signal_cutoff) < 2) fail("signal band is empty for this image size");
    if (BandMask::keep_count(image_size, distractor_cutoff) >= image_size) fail("distractor band is empty");
    if (!(distractor_amplitude >= 0.0) || !(noise_std >= 0.0) || !(coefficient_amplitude > 0.0)) {
      fail("amplitudes must be non-negative");
    }
    if (train_size < classes || test_size < classes) fail("split sizes must be at least the class count");
  }
};

struct Split {
  Tensor images;                     // N,n,n,1
  Tensor labels;                     // N,K one-hot
  std::vector<std::size_t> classes;  // N
};

struct Dataset {
  Split train;
  Split test;
  std::vector<Tensor> signal_patterns;      // K planes n,n
  std::vector<Tensor> distractor_patterns;  // K planes n,n
};

namespace detail {

// Random pattern with DCT support on shells [lo, hi) (DC excluded), scaled
// so its energy is exactly amplitude^2 times the number of coefficients.
inline Tensor band_pattern(const DctPlan& plan, std::size_t lo, std::size_t hi, double amplitude, Rng& rng) {
  const std::size_t n = plan.size();
  std::vector<double> coeffs(n * n, 0.0);
  double energy = 0.0;
  std::size_t support = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t shell = std::max(u, v);
      const double g = rng.normal();
      if (shell >= lo && shell < hi && !(u == 0 && v == 0)) {
        coeffs[u * n + v] = g;
        energy += g * g;
        ++support;
      }
    }
  }
  const double scale = amplitude * std::sqrt(static_cast<double>(support) / energy);
  Tensor spec({n, n});
  for (std::size_t i = 0; i < n * n; ++i) spec[i] = static_cast<float>(coeffs[i] * scale);
  return idct2d(Spectrum{spec}, plan, plan);
}

inline Split make_split(const SyntheticSpec& spec, const std::vector<Tensor>& signal,
                        const std::vector<Tensor>& distractor, std::size_t count, bool spurious, Rng& rng) {
  const std::size_t n = spec.image_size;
  const std::size_t k = spec.classes;
  Split split{Tensor({count, n, n, 1}), Tensor({count, k}), std::vector<std::size_t>(count)};
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t y = i % k;
    const std::size_t j = spurious ? static_cast<std::size_t>(rng.uniform_index(k)) : y;
    split.classes[i] = y;
    split.labels[i * k + y] = 1.0f;
    float* img = split.images.data().data() + i * n * n;
    for (std::size_t p = 0; p < n * n; ++p) {
      const double v = spec.background + signal[y][p] + distractor[j][p] +
                       spec.noise_std * rng.normal();
      img[p] = static_cast<float>(v);
    }
  }
  return split;
}

}  // namespace detail

/// Draws class patterns, then the train and test splits, all from `rng`.
/// Classes are assigned round-robin so both splits are exactly balanced.
inline Dataset generate_synthetic_dataset(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.image_size;
  const DctPlan plan(n);
  const std::size_t signal_keep = BandMask::keep_count(n, spec.signal_cutoff);
  const std::size_t distractor_start = BandMask::keep_count(n, spec.distractor_cutoff);
  Dataset data;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    data.signal_patterns.push_back(detail::band_pattern(plan, 0, signal_keep, spec.coefficient_amplitude, rng));
    data.distractor_patterns.push_back(detail::band_pattern(
        plan, distractor_start, n, spec.coefficient_amplitude * spec.distractor_amplitude, rng));
  }
  data.train = detail::make_split(spec, data.signal_patterns, data.distractor_patterns, spec.train_size, false, rng);
  data.test = detail::make_split(spec, data.signal_patterns, data.distractor_patterns, spec.test_size, true, rng);
  return data;
}

/// Softmax-linear classifier: scores = W x + b with W of shape K x features.
struct LinearModel {
  std::size_t classes = 0;
  std::size_t features = 0;
  std::vector<float> weights;  // row-major K x features
  std::vector<float> bias;     // K

  LinearModel() = default;
  LinearModel(std::size_t k, std::size_t d) : classes(k), features(d), weights(k * d, 0.0f), bias(k, 0.0f) {}

  bool all_finite() const {
    auto finite = [](float v) { return std::isfinite(v); };
    return std::all_of(weights.begin(), weights.end(), finite) && std::all_of(bias.begin(), bias.end(), finite);
  }

  /// N,H,W,C (or N,features) batch to N,K scores.
  Tensor scores(const Tensor& images) const {
    const std::size_t n = images.dim(0);
    if (images.size() != n * features) {
      throw Error(ErrorCode::ShapeMismatch, "batch " + dims_to_string(images.dims()) + " does not have " +
                                                std::to_string(features) + " features per row");
    }
    Tensor out({n, classes});
    for (std::size_t i = 0; i < n; ++i) {
      const float* x = images.data().data() + i * features;
      for (std::size_t k = 0; k < classes; ++k) {
        const float* w = weights.data() + k * features;
        double z = bias[k];
        for (std::size_t j = 0; j < features; ++j) z += static_cast<double>(w[j]) * x[j];
        out[i * classes + k] = static_cast<float>(z);
      }
    }
    return out;
  }
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Mean softmax cross-entropy against soft labels, with its gradient:
///   loss = -(1/N) Σ_i Σ_k y_ik log p_ik,   dL/dW = (1/N) Σ_i (p_i - y_i) x_iᵀ
inline LossGradient loss_and_gradient(const LinearModel& model, const Tensor& images, const Tensor& labels) {
  const std::size_t n = images.dim(0);
  const std::size_t k = model.classes;
  const std::size_t d = model.features;
  if (labels.rank() != 2 || labels.dim(0) != n || labels.dim(1) != k || images.size() != n * d) {
    throw Error(ErrorCode::ShapeMismatch, "loss_and_gradient: inconsistent shapes");
  }
  LossGradient out{0.0, std::vector<double>(k * d, 0.0), std::vector<double>(k, 0.0)};
  std::vector<double> z(k);
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = images.data().data() + i * d;
    for (std::size_t c = 0; c < k; ++c) {
      const float* w = model.weights.data() + c * d;
      double acc = model.bias[c];
      for (std::size_t j = 0; j < d; ++j) acc += static_cast<double>(w[j]) * x[j];
      z[c] = acc;
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double norm = 0.0;
    for (double v : z) norm += std::exp(v - zmax);
    const double log_norm = zmax + std::log(norm);
    for (std::size_t c = 0; c < k; ++c) {
      const double y = labels[i * k + c];
      const double p = std::exp(z[c] - log_norm);
      out.loss -= y * (z[c] - log_norm);
      const double delta = (p - y) / static_cast<double>(n);
      out.bias[c] += delta;
      double* g = out.weights.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += delta * x[j];
    }
  }
  out.loss /= static_cast<double>(n);
  return out;
}

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
};

/// Mini-batch gradient descent on softmax cross-entropy. Each epoch visits a
/// fresh permutation of the training set; every minibatch goes through the
/// augmentation policy before the gradient step. Single-threaded loop, so the
/// result is a pure function of (data, configs, rng state).
inline LinearModel train(const Split& data, const AugmentConfig& policy, const TrainConfig& cfg, Rng& rng) {
  if (data.images.rank() != 4 || data.labels.rank() != 2 || data.labels.dim(0) != data.images.dim(0)) {
    throw Error(ErrorCode::ShapeMismatch, "training split has inconsistent shapes");
  }
  if (cfg.batch_size == 0 || !(cfg.learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "batch size and learning rate must be positive");
  }
  const std::size_t n = data.images.dim(0);
  const std::size_t d = data.images.size() / n;
  const std::size_t k = data.labels.dim(1);
  LinearModel model(k, d);
  Augmenter augment(policy);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Dims image_dims = data.images.dims();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      image_dims[0] = b;
      Tensor xb(image_dims);
      Tensor yb({b, k});
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(data.images.data().begin() + static_cast<std::ptrdiff_t>(src * d), d,
                    xb.data().begin() + static_cast<std::ptrdiff_t>(i * d));
        std::copy_n(data.labels.data().begin() + static_cast<std::ptrdiff_t>(src * k), k,
                    yb.data().begin() + static_cast<std::ptrdiff_t>(i * k));
      }
      const MixedBatch mixed = augment(xb, yb, rng);
      const LossGradient g = loss_and_gradient(model, mixed.images, mixed.labels);
      if (!std::isfinite(g.loss)) {
        throw Error(ErrorCode::DivergedTraining, "loss became non-finite in epoch " + std::to_string(epoch));
      }
      for (std::size_t j = 0; j < k * d; ++j) {
        model.weights[j] = static_cast<float>(model.weights[j] - cfg.learning_rate * g.weights[j]);
      }
      for (std::size_t c = 0; c < k; ++c) {
        model.bias[c] = static_cast<float>(model.bias[c] - cfg.learning_rate * g.bias[c]);
      }
    }
    if (!model.all_finite()) throw Error(ErrorCode::DivergedTraining, "parameters became non-finite");
  }
  return model;
}

/// Fraction of argmax-correct rows; ties resolve to the lowest class index.
inline double evaluate(const LinearModel& model, const Tensor& images, std::span<const std::size_t> classes) {
  if (classes.size() != images.dim(0)) throw Error(ErrorCode::ShapeMismatch, "label count mismatch");
  return accuracy(model.scores(images), classes);
}

inline double evaluate(const LinearModel& model, const Tensor& images, const Tensor& labels) {
  return evaluate(model, images, argmax_rows(labels));
}

struct ExperimentConfig {
  SyntheticSpec spec;
  TrainConfig train;
  double alpha = 0.3;
  double tau = 0.0;
  std::vector<Policy> policies = {Policy::Baseline, Policy::Mixup, Policy::Robustmix,
                                  Policy::RobustmixNoEnergyWeight};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> sweep_cutoffs = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  unsigned threads = 1;
};

struct PolicyOutcome {
  Policy policy = Policy::Baseline;
  std::vector<double> test_accuracy;  // one per seed
  std::vector<SweepCurve> sweeps;     // one per seed
  std::vector<LinearModel> models;    // one per seed

  double mean_accuracy() const {
    return std::accumulate(test_accuracy.begin(), test_accuracy.end(), 0.0) /
           static_cast<double>(test_accuracy.size());
  }

  /// Sample standard deviation across seeds.
  double std_accuracy() const {
    if (test_accuracy.size() < 2) return 0.0;
    const double m = mean_accuracy();
    double ss = 0.0;
    for (double a : test_accuracy) ss += (a - m) * (a - m);
    return std::sqrt(ss / static_cast<double>(test_accuracy.size() - 1));
  }

  SweepCurve mean_sweep() const {
    SweepCurve out;
    if (sweeps.empty()) return out;
    out.cutoffs = sweeps.front().cutoffs;
    out.values.assign(out.cutoffs.size(), 0.0);
    for (const auto& s : sweeps)
      for (std::size_t i = 0; i < s.values.size(); ++i) out.values[i] += s.values[i];
    for (double& v : out.values) v /= static_cast<double>(sweeps.size());
    return out;
  }
};

/// For every seed: generate the dataset from Rng(seed), then train each policy
/// with the same training stream Rng(seed).split(1) and evaluate it on the
/// spurious-distractor test split, clean and low-passed.
inline std::vector<PolicyOutcome> run_experiment(const ExperimentConfig& cfg) {
  std::vector<PolicyOutcome> out;
  for (Policy p : cfg.policies) out.push_back(PolicyOutcome{p, {}, {}, {}});
  for (std::uint64_t seed : cfg.seeds) {
    SyntheticSpec spec = cfg.spec;
    spec.seed = seed;
    Rng data_rng(seed);
    const Dataset data = generate_synthetic_dataset(spec, data_rng);
    for (PolicyOutcome& outcome : out) {
      AugmentConfig aug;
      aug.policy = outcome.policy;
      aug.alpha = cfg.alpha;
      aug.tau = cfg.tau;
      aug.seed = seed;
      aug.threads = cfg.threads;
      Rng train_rng = Rng(seed).split(1);
      LinearModel model = train(data.train, aug, cfg.train, train_rng);
      outcome.test_accuracy.push_back(evaluate(model, data.test.images, data.test.classes));
      const Predictor predict = [&model](const Tensor& x) { return model.scores(x); };
      outcome.sweeps.push_back(
          lowpass_accuracy_sweep(predict, data.test.images, data.test.classes, cfg.sweep_cutoffs, cfg.threads));
      outcome.models.push_back(std::move(model));
    }
  }
  return out;
}

}  // namespace robustmix::toy
