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

#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robustmix/dct.hpp"
#include "robustmix/error.hpp"
#include "robustmix/freq_filter.hpp"
#include "robustmix/rng.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix {

enum class Policy {
  Baseline,
  Mixup,
  Robustmix,
  RobustmixNoEnergyWeight,  // label coefficient uses c instead of the energy weight
  RobustmixNoInbandMix,     // lambda_low = 1, lambda_high = 0
};

constexpr std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::Baseline: return "baseline";
    case Policy::Mixup: return "mixup";
    case Policy::Robustmix: return "robustmix";
    case Policy::RobustmixNoEnergyWeight: return "robustmix_no_energy_weight";
    case Policy::RobustmixNoInbandMix: return "robustmix_no_inband_mix";
  }
  return "unknown";
}

inline Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::Baseline, Policy::Mixup, Policy::Robustmix, Policy::RobustmixNoEnergyWeight,
                   Policy::RobustmixNoInbandMix}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + std::string(name) + "'");
}

/// How each example finds its mixing partner. Reverse pairs row i with row N-1-i.
enum class Pairing { Reverse, RandomPermutation };

struct AugmentConfig {
  Policy policy = Policy::Robustmix;
  double alpha = 0.2;
  double tau = 0.0;
  std::uint64_t seed = 0;
  Pairing pairing = Pairing::Reverse;
  unsigned threads = 1;

  void validate() const {
    if (policy != Policy::Baseline && (!(alpha > 0.0) || !std::isfinite(alpha))) {
      throw Error(ErrorCode::InvalidAlpha, "alpha must be positive, got " + std::to_string(alpha));
    }
    if (!(tau >= 0.0 && tau <= 1.0)) {
      throw Error(ErrorCode::InvalidTau, "tau must lie in [0,1], got " + std::to_string(tau));
    }
  }
};

/// Test hook: values that replace the sampled ones after sampling, so the
/// generator advances exactly as in an unforced call. For Mixup the single
/// coefficient is `lambda_low`.
struct DrawOverride {
  std::optional<double> lambda_low;
  std::optional<double> lambda_high;
  std::optional<double> cutoff;
};

struct MixedBatch {
  Tensor images;
  Tensor labels;
  RobustmixDraw draw;
};

/// lambda * a + (1 - lambda) * b, elementwise.
inline Tensor mix(const Tensor& a, const Tensor& b, double lambda) {
  if (a.dims() != b.dims()) {
    throw Error(ErrorCode::ShapeMismatch, "mix of " + dims_to_string(a.dims()) + " and " +
                                              dims_to_string(b.dims()));
  }
  Tensor out(a.dims());
  const double mu = 1.0 - lambda;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<float>(lambda * a[i] + mu * b[i]);
  return out;
}

namespace detail {

inline void check_batch(const Tensor& images, const Tensor& labels) {
  if (images.rank() != 4) {
    throw Error(ErrorCode::ShapeMismatch, "image batch must be N,H,W,C, got " + dims_to_string(images.dims()));
  }
  if (labels.rank() != 2 || labels.dim(0) != images.dim(0)) {
    throw Error(ErrorCode::ShapeMismatch, "labels " + dims_to_string(labels.dims()) +
                                              " do not match batch of " + std::to_string(images.dim(0)));
  }
}

inline std::vector<std::size_t> partner_order(std::size_t n, Pairing pairing, Rng& rng) {
  if (pairing == Pairing::Reverse) return reversed_order(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return order;
}

/// mix(Y, Y[partner], coefficient) row by row.
inline Tensor mix_rows(const Tensor& t, std::span<const std::size_t> partner, double coefficient) {
  return mix(t, gather_rows(t, partner), coefficient);
}

enum class LabelWeight { Energy, Cutoff };

// Reordered evaluation: filter once, then mix each band with its partner.
//   L = Low(X, c), H = X - L, energy = ‖L‖²/‖X‖²
//   X~ = mix(L, L[p], lambda_low) + mix(H, H[p], lambda_high)
//   Y~ = mix(Y, Y[p], w * lambda_low + (1 - w) * lambda_high)
inline MixedBatch apply_band_mix(const Tensor& images, const Tensor& labels, RobustmixDraw draw,
                                 LabelWeight weight, std::span<const std::size_t> partner,
                                 const DctPlan& plan, unsigned threads) {
  BandSplit split = split_low_band(images, draw.cutoff, plan, threads);
  const Tensor& low = split.low;
  const Tensor high = subtract(images, low);
  draw.energy_weight = split.low_energy_fraction;

  const std::size_t n = images.dim(0);
  const std::size_t stride = images.size() / n;
  const double ll = draw.lambda_low;
  const double lh = draw.lambda_high;
  Tensor out(images.dims());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i * stride;
    const std::size_t b = partner[i] * stride;
    for (std::size_t j = 0; j < stride; ++j) {
      const double lo = ll * low[a + j] + (1.0 - ll) * low[b + j];
      const double hi = lh * high[a + j] + (1.0 - lh) * high[b + j];
      out[a + j] = static_cast<float>(lo + hi);
    }
  }

  const double w = weight == LabelWeight::Energy ? draw.energy_weight : draw.cutoff;
  const double coefficient = w * ll + (1.0 - w) * lh;
  return {std::move(out), mix_rows(labels, partner, coefficient), draw};
}

inline RobustmixDraw draw_with_override(const AugmentConfig& cfg, Rng& rng, const DrawOverride& force) {
  RobustmixDraw d = sample_robustmix_draw(cfg.alpha, cfg.tau, rng);
  if (force.lambda_low) d.lambda_low = *force.lambda_low;
  if (force.lambda_high) d.lambda_high = *force.lambda_high;
  if (force.cutoff) d.cutoff = *force.cutoff;
  return d;
}

inline MixedBatch robustmix_variant(const Tensor& images, const Tensor& labels, const AugmentConfig& cfg,
                                    Rng& rng, const DrawOverride& force, LabelWeight weight,
                                    bool inband, const DctPlan* plan) {
  cfg.validate();
  check_batch(images, labels);
  const BatchShape s = BatchShape::of(images);
  if (s.h != s.w) {
    throw Error(ErrorCode::NonSquarePlane, "planes must be square, got " + std::to_string(s.h) + "x" +
                                               std::to_string(s.w));
  }
  RobustmixDraw draw = draw_with_override(cfg, rng, force);
  if (!inband) {
    draw.lambda_low = 1.0;
    draw.lambda_high = 0.0;
  }
  check_cutoff(draw.cutoff);
  const auto partner = partner_order(images.dim(0), cfg.pairing, rng);
  if (plan) return apply_band_mix(images, labels, draw, weight, partner, *plan, cfg.threads);
  return apply_band_mix(images, labels, draw, weight, partner, DctPlan(s.h), cfg.threads);
}

}  // namespace detail

/// Mixup with one lambda ~ Beta(alpha, alpha) per batch; partners by reversal.
inline MixedBatch mixup_batch(const Tensor& images, const Tensor& labels, const AugmentConfig& cfg, Rng& rng,
                              const DrawOverride& force = {}) {
  cfg.validate();
  detail::check_batch(images, labels);
  double lambda = sample_beta(cfg.alpha, rng);
  if (force.lambda_low) lambda = *force.lambda_low;
  const auto partner = detail::partner_order(images.dim(0), cfg.pairing, rng);
  RobustmixDraw draw{lambda, lambda, 1.0, 1.0};
  return {detail::mix_rows(images, partner, lambda), detail::mix_rows(labels, partner, lambda), draw};
}

/// Band-interpolated Mixup with energy-weighted labels.
inline MixedBatch robustmix_batch(const Tensor& images, const Tensor& labels, const AugmentConfig& cfg,
                                  Rng& rng, const DrawOverride& force = {}, const DctPlan* plan = nullptr) {
  return detail::robustmix_variant(images, labels, cfg, rng, force, detail::LabelWeight::Energy, true, plan);
}

/// Ablation: label coefficient c * lambda_low + (1 - c) * lambda_high.
inline MixedBatch robustmix_no_energy_weight_batch(const Tensor& images, const Tensor& labels,
                                                   const AugmentConfig& cfg, Rng& rng,
                                                   const DrawOverride& force = {},
                                                   const DctPlan* plan = nullptr) {
  return detail::robustmix_variant(images, labels, cfg, rng, force, detail::LabelWeight::Cutoff, true, plan);
}

/// Ablation: Low(x1, c) + High(x2, c) with labels energy-weighted.
inline MixedBatch robustmix_no_inband_mix_batch(const Tensor& images, const Tensor& labels,
                                                const AugmentConfig& cfg, Rng& rng,
                                                const DrawOverride& force = {},
                                                const DctPlan* plan = nullptr) {
  return detail::robustmix_variant(images, labels, cfg, rng, force, detail::LabelWeight::Energy, false, plan);
}

/// Dispatches on cfg.policy and keeps one DCT plan per plane size.
class Augmenter {
 public:
  explicit Augmenter(AugmentConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const AugmentConfig& config() const noexcept { return cfg_; }

  MixedBatch operator()(const Tensor& images, const Tensor& labels, Rng& rng, const DrawOverride& force = {}) {
    detail::check_batch(images, labels);
    switch (cfg_.policy) {
      case Policy::Baseline: return {images, labels, RobustmixDraw{}};
      case Policy::Mixup: return mixup_batch(images, labels, cfg_, rng, force);
      case Policy::Robustmix: return robustmix_batch(images, labels, cfg_, rng, force, &plan(images));
      case Policy::RobustmixNoEnergyWeight:
        return robustmix_no_energy_weight_batch(images, labels, cfg_, rng, force, &plan(images));
      case Policy::RobustmixNoInbandMix:
        return robustmix_no_inband_mix_batch(images, labels, cfg_, rng, force, &plan(images));
    }
    throw Error(ErrorCode::InvalidArgument, "unhandled policy");
  }

 private:
  const DctPlan& plan(const Tensor& images) {
    const std::size_t n = images.dim(1);
    auto it = plans_.find(n);
    if (it == plans_.end()) it = plans_.emplace(n, DctPlan(n)).first;
    return it->second;
  }

  AugmentConfig cfg_;
  std::map<std::size_t, DctPlan> plans_;
};

/// Free-function form of Augmenter for one-off calls.
inline MixedBatch augment_batch(const Tensor& images, const Tensor& labels, const AugmentConfig& cfg, Rng& rng,
                                const DrawOverride& force = {}) {
  Augmenter aug(cfg);
  return aug(images, labels, rng, force);
}

}  // namespace robustmix
