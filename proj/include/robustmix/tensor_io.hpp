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
#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "robustmix/error.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix {

// RTEN container, little-endian throughout:
//   "RTEN" | u32 version=1 | u8 dtype=0 (f32) | u8 ndim (1..4) | ndim x u64 dims | f32 payload
namespace rten {

inline constexpr std::array<char, 4> kMagic = {'R', 'T', 'E', 'N'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

inline std::size_t header_size(std::size_t ndim) { return 4 + 4 + 1 + 1 + 8 * ndim; }

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<T>(bytes[offset + i]) << (8 * i));
  }
  return value;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(header_size(t.rank()) + 4 * t.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  detail::put_le<std::uint32_t>(out, kVersion);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.dims()) detail::put_le<std::uint64_t>(out, d);
  for (float v : t.data()) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline Tensor decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < header_size(0) ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorCode::MalformedHeader, "missing RTEN magic");
  }
  if (detail::get_le<std::uint32_t>(bytes, 4) != kVersion) {
    throw Error(ErrorCode::MalformedHeader, "unsupported RTEN version");
  }
  if (bytes[8] != kDtypeF32) throw Error(ErrorCode::MalformedHeader, "unsupported dtype");
  const std::size_t ndim = bytes[9];
  if (ndim < 1 || ndim > Tensor::kMaxRank) {
    throw Error(ErrorCode::MalformedHeader, "ndim must be 1..4, got " + std::to_string(ndim));
  }
  if (bytes.size() < header_size(ndim)) throw Error(ErrorCode::MalformedHeader, "header truncated");

  Dims dims(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::uint64_t d = detail::get_le<std::uint64_t>(bytes, 10 + 8 * i);
    if (d == 0) throw Error(ErrorCode::MalformedHeader, "zero extent");
    if (count > (std::uint64_t{1} << 40) / d) throw Error(ErrorCode::MalformedHeader, "dims too large");
    dims[i] = static_cast<std::size_t>(d);
    count *= dims[i];
  }
  const std::size_t payload = bytes.size() - header_size(ndim);
  if (payload != 4 * count) {
    throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(4 * count) +
                                                 " payload bytes, found " + std::to_string(payload));
  }
  std::vector<float> data(count);
  const std::size_t base = header_size(ndim);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, base + 4 * i));
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::NonFiniteValue, "element " + std::to_string(i) + " is not finite");
    }
  }
  return Tensor(std::move(dims), std::move(data));
}

}  // namespace rten

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

inline Tensor read_tensor(const std::filesystem::path& path) { return rten::decode(read_file_bytes(path)); }

inline void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  write_file_bytes(path, rten::encode(t));
}

// Binary PGM (P5) and PPM (P6) with maxval 255. Values map to [0,1] by v/255.
namespace pnm {

namespace detail {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t next_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_++] - '0');
      if (++digits > 9) throw Error(ErrorCode::MalformedImage, "header value too large");
    }
    if (digits == 0) throw Error(ErrorCode::MalformedImage, "expected a number in header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedImage, "missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace detail

inline Tensor decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorCode::UnsupportedFormat, "not a PNM file");
  std::size_t channels = 0;
  if (bytes[1] == '5') {
    channels = 1;
  } else if (bytes[1] == '6') {
    channels = 3;
  } else {
    throw Error(ErrorCode::UnsupportedFormat, std::string("PNM variant P") + static_cast<char>(bytes[1]));
  }
  detail::HeaderReader header(bytes);
  const std::size_t width = header.next_number();
  const std::size_t height = header.next_number();
  const std::size_t maxval = header.next_number();
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedImage, "zero image extent");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedFormat, "maxval " + std::to_string(maxval) + " (only 255 supported)");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = width * height * channels;
  if (bytes.size() - offset < count) throw Error(ErrorCode::MalformedImage, "raster truncated");

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<float>(bytes[offset + i]) / 255.0f;
  return Tensor({height, width, channels}, std::move(data));
}

/// Quantizes values in [0,1] to 8 bits (round to nearest, clamped). Accepts H,W or H,W,C with C in {1,3}.
inline std::vector<std::uint8_t> encode(const Tensor& image) {
  const BatchShape s = BatchShape::of(image);
  if (image.rank() == 4 || (s.c != 1 && s.c != 3)) {
    throw Error(ErrorCode::ShapeMismatch, "image must be H,W or H,W,C with C in {1,3}");
  }
  const std::string header = std::string(s.c == 1 ? "P5" : "P6") + "\n" + std::to_string(s.w) + " " +
                             std::to_string(s.h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (float v : image.data()) {
    const float q = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    out.push_back(static_cast<std::uint8_t>(q));
  }
  return out;
}

}  // namespace pnm

inline Tensor read_image(const std::filesystem::path& path) { return pnm::decode(read_file_bytes(path)); }

inline void write_image(const Tensor& image, const std::filesystem::path& path) {
  write_file_bytes(path, pnm::encode(image));
}

/// Every .pgm/.ppm file directly inside `dir`, in filename order.
inline std::vector<Tensor> read_image_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::IoFailure, "no .pgm/.ppm images in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<Tensor> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_image(f));
  return out;
}

}  // namespace robustmix
