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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "robustmix/error.hpp"

namespace robustmix {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seedable generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are not, so every variate here is derived from
/// raw engine words by code in this file.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream for worker `stream`; depends only on (seed, stream).
  Rng split(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 1))); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer on [0, bound) by rejection, bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % bound;
  }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// log of a Gamma(shape, 1) variate. Marsaglia-Tsang for shape >= 1; for
  /// shape < 1 uses G(shape) = G(shape + 1) * U^(1/shape), kept in log space
  /// so tiny variates do not underflow.
  double log_gamma_variate(double shape) {
    if (shape < 1.0) return log_gamma_variate(shape + 1.0) + std::log(uniform_open()) / shape;
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double z = 0.0;
      double v = 0.0;
      do {
        z = normal();
        v = 1.0 + c * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * z * z * z * z) return std::log(d * v);
      if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b), computed as a
/// logistic of the log-ratio.
inline double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::InvalidAlpha, "Beta parameters must be positive and finite");
  }
  const double log_x = rng.log_gamma_variate(a);
  const double log_y = rng.log_gamma_variate(b);
  return 1.0 / (1.0 + std::exp(log_y - log_x));
}

/// Symmetric Beta(alpha, alpha), the Mixup coefficient distribution.
inline double sample_beta(double alpha, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidAlpha, "alpha must be positive, got " + std::to_string(alpha));
  }
  return sample_beta(alpha, alpha, rng);
}

/// Cutoff c ~ U[tau, 1]. tau = 0 is the plain U(0,1) draw; tau = 1 always
/// yields 1. One engine word is consumed either way.
inline double sample_cutoff(double tau, Rng& rng) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::InvalidTau, "tau must lie in [0,1], got " + std::to_string(tau));
  }
  const double u = rng.uniform();
  const double c = tau + (1.0 - tau) * u;
  return c > 1.0 ? 1.0 : c;
}

/// One minibatch's sampled parameters. energy_weight is filled in by the
/// augmentation step once the low band is known.
struct RobustmixDraw {
  double lambda_low = 1.0;
  double lambda_high = 1.0;
  double cutoff = 1.0;
  double energy_weight = 1.0;
};

/// Draws (lambda_low, lambda_high, cutoff) in that order.
inline RobustmixDraw sample_robustmix_draw(double alpha, double tau, Rng& rng) {
  RobustmixDraw d;
  d.lambda_low = sample_beta(alpha, rng);
  d.lambda_high = sample_beta(alpha, rng);
  d.cutoff = sample_cutoff(tau, rng);
  return d;
}

}  // namespace robustmix
