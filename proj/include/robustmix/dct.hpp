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
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "robustmix/error.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix {

/// Precomputed orthonormal DCT-II matrix of one extent:
///   G[u][x] = s(u) * cos(pi * (2x + 1) * u / (2n)),  s(0) = sqrt(1/n), s(u>0) = sqrt(2/n).
/// Stored in double; immutable and safe to share across threads.
class DctPlan {
 public:
  explicit DctPlan(std::size_t n) : n_(n) {
    if (n == 0) throw Error(ErrorCode::InvalidSize, "DCT size must be positive");
    matrix_.resize(n * n);
    transposed_.resize(n * n);
    const double dn = static_cast<double>(n);
    for (std::size_t u = 0; u < n; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn);
      for (std::size_t x = 0; x < n; ++x) {
        // Reduce the angle index mod 4n so large n keeps full cos() accuracy.
        const std::uint64_t idx = ((2 * static_cast<std::uint64_t>(x) + 1) * u) % (4 * n);
        matrix_[u * n + x] = scale * std::cos(std::numbers::pi * static_cast<double>(idx) / (2.0 * dn));
        transposed_[x * n + u] = matrix_[u * n + x];
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t u, std::size_t x) const { return matrix_[u * n_ + x]; }
  std::span<const double> row(std::size_t u) const { return {matrix_.data() + u * n_, n_}; }
  /// Row x of G^T, i.e. column x of G.
  std::span<const double> column(std::size_t x) const { return {transposed_.data() + x * n_, n_}; }
  std::span<const double> matrix() const noexcept { return matrix_; }

 private:
  std::size_t n_;
  std::vector<double> matrix_;
  std::vector<double> transposed_;
};

inline DctPlan make_plan(std::size_t n) { return DctPlan(n); }

/// DCT coefficients of an H,W plane. Entry (u,v) holds vertical frequency u and
/// horizontal frequency v; (0,0) is DC.
struct Spectrum {
  Tensor coefficients;
};

namespace kernel {

// Forward: out = G_h * in * G_w^T. `in` is h x w with row stride `in_row`
// and element stride `in_col`; `out` is dense h x w. `tmp` needs h*w doubles.
inline void forward(const DctPlan& gh, const DctPlan& gw, const float* in, std::size_t in_row,
                    std::size_t in_col, double* out, double* tmp) {
  const std::size_t h = gh.size();
  const std::size_t w = gw.size();
  // tmp = in * G_w^T, accumulated row by row: tmp[x][:] += in[x][y] * G_w[:, y]
  std::fill(tmp, tmp + h * w, 0.0);
  for (std::size_t x = 0; x < h; ++x) {
    double* dst = tmp + x * w;
    for (std::size_t y = 0; y < w; ++y) {
      const double s = in[x * in_row + y * in_col];
      const double* g = gw.column(y).data();
      for (std::size_t v = 0; v < w; ++v) dst[v] += s * g[v];
    }
  }
  std::fill(out, out + h * w, 0.0);
  for (std::size_t u = 0; u < h; ++u) {
    double* dst = out + u * w;
    for (std::size_t x = 0; x < h; ++x) {
      const double g = gh(u, x);
      const double* src = tmp + x * w;
      for (std::size_t v = 0; v < w; ++v) dst[v] += g * src[v];
    }
  }
}

// Inverse: out = G_h^T * in * G_w, all dense h x w. Only the leading
// rows_used x cols_used block of `in` may be nonzero; the rest is skipped.
inline void inverse(const DctPlan& gh, const DctPlan& gw, const double* in, std::size_t rows_used,
                    std::size_t cols_used, double* out, double* tmp) {
  const std::size_t h = gh.size();
  const std::size_t w = gw.size();
  std::fill(tmp, tmp + h * w, 0.0);
  for (std::size_t u = 0; u < rows_used; ++u) {
    double* dst = tmp + u * w;
    for (std::size_t v = 0; v < cols_used; ++v) {
      const double s = in[u * w + v];
      const auto g = gw.row(v);
      for (std::size_t y = 0; y < w; ++y) dst[y] += s * g[y];
    }
  }
  std::fill(out, out + h * w, 0.0);
  for (std::size_t x = 0; x < h; ++x) {
    double* dst = out + x * w;
    for (std::size_t u = 0; u < rows_used; ++u) {
      const double g = gh(u, x);
      const double* src = tmp + u * w;
      for (std::size_t y = 0; y < w; ++y) dst[y] += g * src[y];
    }
  }
}

}  // namespace kernel

inline void check_plane(const Tensor& t, const DctPlan& plan_h, const DctPlan& plan_w) {
  if (t.rank() != 2 || t.dim(0) != plan_h.size() || t.dim(1) != plan_w.size()) {
    throw Error(ErrorCode::ShapeMismatch, "plane dims " + dims_to_string(t.dims()) + " do not match plans " +
                                              std::to_string(plan_h.size()) + "x" +
                                              std::to_string(plan_w.size()));
  }
}

/// Spectrum = G_H * plane * G_W^T.
inline Spectrum dct2d(const Tensor& plane, const DctPlan& plan_h, const DctPlan& plan_w) {
  check_plane(plane, plan_h, plan_w);
  const std::size_t h = plan_h.size();
  const std::size_t w = plan_w.size();
  std::vector<double> out(h * w);
  std::vector<double> tmp(h * w);
  kernel::forward(plan_h, plan_w, plane.data().data(), w, 1, out.data(), tmp.data());
  return {Tensor({h, w}, std::vector<float>(out.begin(), out.end()))};
}

/// plane = G_H^T * spectrum * G_W.
inline Tensor idct2d(const Spectrum& spectrum, const DctPlan& plan_h, const DctPlan& plan_w) {
  const Tensor& s = spectrum.coefficients;
  check_plane(s, plan_h, plan_w);
  const std::size_t h = plan_h.size();
  const std::size_t w = plan_w.size();
  std::vector<double> in(s.data().begin(), s.data().end());
  std::vector<double> out(h * w);
  std::vector<double> tmp(h * w);
  kernel::inverse(plan_h, plan_w, in.data(), h, w, out.data(), tmp.data());
  return Tensor({h, w}, std::vector<float>(out.begin(), out.end()));
}

/// Multiply-accumulate count of one Robustmix image pass: six n^3-type matrix
/// products per plane. One MAC is counted as one FLOP.
constexpr std::uint64_t flop_estimate(std::uint64_t h, std::uint64_t w, std::uint64_t channels) {
  return 6 * h * w * (h > w ? h : w) * channels;
}

}  // namespace robustmix
