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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "robustmix/dct.hpp"
#include "robustmix/error.hpp"
#include "robustmix/parallel.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix {

/// Energy below which a batch is treated as carrying no energy.
inline constexpr double kZeroEnergyThreshold = 1e-12;

inline void check_cutoff(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw Error(ErrorCode::CutoffOutOfRange, "cutoff must lie in [0,1], got " + std::to_string(c));
  }
}

/// Square low-frequency support: M[u][v] = 1 iff u < k and v < k, with
/// k = round(c * n) rounding halves up. c = 0 keeps nothing, c = 1 keeps everything.
class BandMask {
 public:
  BandMask(std::size_t n, double cutoff) : n_(n), cutoff_(cutoff) {
    check_cutoff(cutoff);
    keep_ = keep_count(n, cutoff);
  }

  static std::size_t keep_count(std::size_t n, double cutoff) {
    const auto k = static_cast<std::size_t>(std::floor(cutoff * static_cast<double>(n) + 0.5));
    return k > n ? n : k;
  }

  std::size_t size() const noexcept { return n_; }
  double cutoff() const noexcept { return cutoff_; }
  std::size_t keep() const noexcept { return keep_; }
  bool operator()(std::size_t u, std::size_t v) const noexcept { return u < keep_ && v < keep_; }

  Tensor as_tensor() const {
    Tensor m({n_, n_});
    for (std::size_t u = 0; u < keep_; ++u)
      for (std::size_t v = 0; v < keep_; ++v) m[u * n_ + v] = 1.0f;
    return m;
  }

 private:
  std::size_t n_;
  double cutoff_;
  std::size_t keep_ = 0;
};

namespace detail {

inline BatchShape square_batch(const Tensor& x, const DctPlan& plan) {
  const BatchShape s = BatchShape::of(x);
  if (s.h != s.w) {
    throw Error(ErrorCode::NonSquarePlane, "planes must be square, got " + std::to_string(s.h) + "x" +
                                               std::to_string(s.w));
  }
  if (s.h != plan.size()) {
    throw Error(ErrorCode::ShapeMismatch, "plan size " + std::to_string(plan.size()) +
                                              " does not match plane size " + std::to_string(s.h));
  }
  return s;
}

// One pass over every (image, channel) plane: forward DCT, optional per-shell
// energy (shell j = coefficients with max(u,v) == j), optional masked inverse
// into `low`. Shell energies are reduced over planes in plane order.
inline std::vector<double> transform_planes(const Tensor& x, const DctPlan& plan, std::size_t keep,
                                            unsigned threads, Tensor* low, bool want_shells) {
  const BatchShape s = square_batch(x, plan);
  const std::size_t n = s.h;
  const std::size_t planes = s.plane_count();
  std::vector<double> per_plane(want_shells ? planes * n : 0, 0.0);
  const float* src = x.data().data();
  float* dst = low ? low->data().data() : nullptr;

  parallel_for(planes, threads, [&](std::size_t p) {
    const std::size_t base = (p / s.c) * s.image_size() + p % s.c;
    std::vector<double> spec(n * n), tmp(n * n);
    kernel::forward(plan, plan, src + base, n * s.c, s.c, spec.data(), tmp.data());
    if (want_shells) {
      double* shell = per_plane.data() + p * n;
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) shell[u > v ? u : v] += spec[u * n + v] * spec[u * n + v];
    }
    if (dst) {
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
          if (u >= keep || v >= keep) spec[u * n + v] = 0.0;
      std::vector<double> plane(n * n);
      kernel::inverse(plan, plan, spec.data(), keep, keep, plane.data(), tmp.data());
      for (std::size_t i = 0; i < n * n; ++i) dst[base + i * s.c] = static_cast<float>(plane[i]);
    }
  });

  std::vector<double> shells(want_shells ? n : 0, 0.0);
  for (std::size_t p = 0; p < (want_shells ? planes : 0); ++p)
    for (std::size_t j = 0; j < n; ++j) shells[j] += per_plane[p * n + j];
  return shells;
}

}  // namespace detail

/// Spectral energy of a batch grouped by square shell: entry j sums the squared
/// DCT coefficients with max(u,v) == j over all planes. The energy kept by a
/// mask with keep-count k is the sum of the first k shells.
inline std::vector<double> shell_energies(const Tensor& x, const DctPlan& plan, unsigned threads = 1) {
  return detail::transform_planes(x, plan, 0, threads, nullptr, true);
}

/// Prefix-sum ratio over shells. Exactly 0 at k = 0, exactly 1 at k = n and
/// nondecreasing in k.
inline double fraction_from_shells(std::span<const double> shells, std::size_t keep) {
  double low = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < shells.size(); ++j) {
    if (j == keep) low = total;
    total += shells[j];
  }
  if (keep >= shells.size()) low = total;
  if (total <= kZeroEnergyThreshold) {
    throw Error(ErrorCode::ZeroEnergyBatch, "batch energy " + std::to_string(total) + " is ~0");
  }
  return low / total;
}

/// Low(x, c): idct2d(M ⊙ dct2d(plane)) for every (image, channel) plane of x.
/// Accepts H,W / H,W,C / N,H,W,C tensors. The all-pass and all-stop cases are
/// returned exactly (copy / zeros) without going through the transform.
inline Tensor low_pass(const Tensor& x, double cutoff, const DctPlan& plan, unsigned threads = 1) {
  const BatchShape s = detail::square_batch(x, plan);
  const BandMask mask(s.h, cutoff);
  if (mask.keep() == s.h) return x;
  Tensor out(x.dims());
  if (mask.keep() == 0) return out;
  detail::transform_planes(x, plan, mask.keep(), threads, &out, false);
  return out;
}

inline Tensor low_pass(const Tensor& x, double cutoff, unsigned threads = 1) {
  return low_pass(x, cutoff, DctPlan(BatchShape::of(x).h), threads);
}

inline Tensor subtract(const Tensor& x, const Tensor& y) {
  if (x.dims() != y.dims()) throw Error(ErrorCode::ShapeMismatch, "subtract shape mismatch");
  Tensor out(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

/// x - low_pass(x, c); low + high reassembles x exactly.
inline Tensor high_pass(const Tensor& x, double cutoff, const DctPlan& plan, unsigned threads = 1) {
  return subtract(x, low_pass(x, cutoff, plan, threads));
}

inline Tensor high_pass(const Tensor& x, double cutoff, unsigned threads = 1) {
  return high_pass(x, cutoff, DctPlan(BatchShape::of(x).h), threads);
}

/// Low band of a batch together with its energy fraction, from one DCT pass.
struct BandSplit {
  Tensor low;
  double low_energy_fraction = 0.0;
};

inline BandSplit split_low_band(const Tensor& x, double cutoff, const DctPlan& plan, unsigned threads = 1) {
  const BatchShape s = detail::square_batch(x, plan);
  const BandMask mask(s.h, cutoff);
  BandSplit out{Tensor(x.dims()), 0.0};
  if (mask.keep() == s.h) {
    out.low = x;
    const auto shells = detail::transform_planes(x, plan, 0, threads, nullptr, true);
    out.low_energy_fraction = fraction_from_shells(shells, mask.keep());
    return out;
  }
  Tensor* low = mask.keep() == 0 ? nullptr : &out.low;
  const auto shells = detail::transform_planes(x, plan, mask.keep(), threads, low, true);
  out.low_energy_fraction = fraction_from_shells(shells, mask.keep());
  return out;
}

/// Σ‖Low(x_i, c)‖² / Σ‖x_i‖² over the batch, evaluated in the DCT domain
/// (equal to the image-domain ratio by Parseval).
inline double band_energy_fraction(const Tensor& x, double cutoff, const DctPlan& plan,
                                   unsigned threads = 1) {
  const BandMask mask(plan.size(), cutoff);
  return fraction_from_shells(shell_energies(x, plan, threads), mask.keep());
}

inline double band_energy_fraction(const Tensor& x, double cutoff, unsigned threads = 1) {
  return band_energy_fraction(x, cutoff, DctPlan(BatchShape::of(x).h), threads);
}

}  // namespace robustmix
