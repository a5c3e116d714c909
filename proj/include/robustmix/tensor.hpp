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
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustmix/error.hpp"

namespace robustmix {

using Dims = std::vector<std::size_t>;

inline std::size_t element_count(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string dims_to_string(const Dims& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

/// Dense row-major f32 array of rank 1..4. Image batches are laid out N,H,W,C
/// and label matrices N,K.
class Tensor {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Tensor() = default;

  explicit Tensor(Dims dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(element_count(dims_), 0.0f);
  }

  Tensor(Dims dims, std::vector<float> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != element_count(dims_)) {
      throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                                " does not match dims " + dims_to_string(dims_));
    }
  }

  const Dims& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
  }

  /// Squared L2 norm accumulated in double, in storage order.
  double squared_norm() const {
    double acc = 0.0;
    for (float v : data_) acc += static_cast<double>(v) * v;
    return acc;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  static void check_dims(const Dims& dims) {
    if (dims.empty() || dims.size() > kMaxRank) {
      throw Error(ErrorCode::ShapeMismatch, "rank must be 1..4, got " + std::to_string(dims.size()));
    }
    for (std::size_t d : dims) {
      if (d == 0) throw Error(ErrorCode::ShapeMismatch, "zero extent in dims " + dims_to_string(dims));
    }
  }

  Dims dims_;
  std::vector<float> data_;
};

/// Image-batch geometry. Rank 2 is read as H,W; rank 3 as H,W,C; rank 4 as N,H,W,C.
struct BatchShape {
  std::size_t n = 1;
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t c = 1;

  std::size_t plane_count() const noexcept { return n * c; }
  std::size_t image_size() const noexcept { return h * w * c; }

  static BatchShape of(const Tensor& t) {
    const Dims& d = t.dims();
    switch (d.size()) {
      case 2: return {1, d[0], d[1], 1};
      case 3: return {1, d[0], d[1], d[2]};
      case 4: return {d[0], d[1], d[2], d[3]};
      default:
        throw Error(ErrorCode::ShapeMismatch, "expected image rank 2..4, got dims " + dims_to_string(d));
    }
  }
};

/// Copies of the leading-axis rows of `t` in the order given by `order`.
inline Tensor gather_rows(const Tensor& t, std::span<const std::size_t> order) {
  const std::size_t rows = t.dim(0);
  if (order.size() != rows) throw Error(ErrorCode::ShapeMismatch, "gather order length mismatch");
  const std::size_t stride = t.size() / rows;
  Tensor out(t.dims());
  for (std::size_t i = 0; i < rows; ++i) {
    if (order[i] >= rows) throw Error(ErrorCode::ShapeMismatch, "gather index out of range");
    auto src = t.data().subspan(order[i] * stride, stride);
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return out;
}

inline std::vector<std::size_t> reversed_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = n - 1 - i;
  return order;
}

/// Reverses the leading axis.
inline Tensor reverse_rows(const Tensor& t) { return gather_rows(t, reversed_order(t.dim(0))); }

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) throw Error(ErrorCode::ShapeMismatch, "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

}  // namespace robustmix
