// Copyright (c) 2026 The STVS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary netpbm I/O. P6 decodes to [3,H,W], P5 to [1,H,W], values v/255.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stvs/tensor.hpp"
#include "stvs/weight_store.hpp"

namespace stvs {

namespace detail {

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(const std::vector<char>& b) : b_(b) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::int64_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::int64_t v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > (1 << 24)) throw FormatError(std::string(what) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("expected ") + what, start);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      throw FormatError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  const std::vector<char>& b_;
  std::size_t pos_ = 2;
};

inline std::uint8_t quantize_u8(float v) {
  if (!std::isfinite(v)) throw std::domain_error("cannot quantize a non-finite value");
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline void write_pnm(const std::filesystem::path& path, const char* magic, const Tensor& t,
                      std::int64_t channels) {
  if (t.rank() != 3 || t.dim(0) != channels) {
    throw ShapeError(std::string(magic) + " output expects [" + std::to_string(channels) +
                     ",H,W], got " + dims_str(t.dims()));
  }
  const auto H = t.dim(1), W = t.dim(2), plane = H * W;
  std::string out = std::string(magic) + "\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + static_cast<std::size_t>(channels * plane));
  for (std::int64_t p = 0; p < plane; ++p)
    for (std::int64_t c = 0; c < channels; ++c)
      out[header + p * channels + c] = static_cast<char>(quantize_u8(t[c * plane + p]));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace detail

/// Decodes an in-memory P5/P6 image. FormatError offsets point into `bytes`.
inline Tensor decode_pnm(const std::vector<char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("bad magic: expected P5 or P6", 0);
  }
  const std::int64_t channels = bytes[1] == '6' ? 3 : 1;
  detail::PnmHeaderReader r(bytes);
  const auto W = r.number("width");
  const auto H = r.number("height");
  r.skip_space_and_comments();
  const std::size_t maxval_pos = r.pos();
  const auto maxval = r.number("maxval");
  if (W <= 0 || H <= 0) throw FormatError("image dimensions must be positive", maxval_pos);
  if (maxval != 255) {
    throw FormatError("maxval must be 255, got " + std::to_string(maxval), maxval_pos);
  }
  r.single_space();
  const std::size_t start = r.pos();
  const auto plane = H * W;
  const auto need = static_cast<std::size_t>(channels * plane);
  if (bytes.size() - start < need) {
    throw FormatError("truncated raster: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - start),
                      bytes.size());
  }
  if (bytes.size() - start > need) throw FormatError("trailing bytes after raster", start + need);
  Tensor t({channels, H, W});
  for (std::int64_t p = 0; p < plane; ++p)
    for (std::int64_t c = 0; c < channels; ++c) {
      const auto byte = static_cast<unsigned char>(bytes[start + p * channels + c]);
      t[c * plane + p] = static_cast<float>(byte) / 255.0f;
    }
  return t;
}

inline Tensor read_image(const std::filesystem::path& path) {
  try {
    return decode_pnm(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

/// [1,H,W] -> P5, bytes round(v*255) after clamping to [0,1].
inline void write_gray(const std::filesystem::path& path, const Tensor& t) {
  detail::write_pnm(path, "P5", t, 1);
}

/// [3,H,W] -> P6.
inline void write_rgb(const std::filesystem::path& path, const Tensor& t) {
  detail::write_pnm(path, "P6", t, 3);
}

inline bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

/// Regular image files directly inside `dir`, sorted by file name.
inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

}  // namespace stvs
