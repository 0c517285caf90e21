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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvs/image_io.hpp"
#include "stvs/network.hpp"
#include "stvs/nn_ops.hpp"

namespace stvs {

inline constexpr int kMaxInterval = 6;

/// Bilinear resize of a [C,H,W] tensor to [C,h,w]; up or down.
inline Tensor resize_to(const Tensor& t, std::int64_t h, std::int64_t w) {
  if (t.rank() != 3) throw ShapeError("resize_to expects [C,H,W], got " + dims_str(t.dims()));
  if (t.dim(1) == h && t.dim(2) == w) return t;
  return resize_bilinear(t, h, w);
}

/// Mirror about the vertical axis (last dim).
template <typename T>
BasicTensor<T> hflip(const BasicTensor<T>& t) {
  if (t.rank() < 1) throw ShapeError("hflip needs at least one axis");
  const auto W = static_cast<std::size_t>(t.dim(t.rank() - 1));
  BasicTensor<T> out(t.dims());
  for (std::size_t r = 0; r < t.size() / std::max<std::size_t>(W, 1); ++r)
    for (std::size_t x = 0; x < W; ++x) out[r * W + x] = t[r * W + (W - 1 - x)];
  return out;
}

inline FrameClip hflip(const FrameClip& c) {
  FrameClip out = c;
  for (auto& f : out.frames) f = hflip(f);
  if (out.mask) out.mask = hflip(*out.mask);
  return out;
}

/// Source positions (into the sorted frame list) of each clip produced by
/// clip_iter: subsample with stride interval+1, then slide a window of 3.
/// A single frame yields one clip of three copies.
inline std::vector<std::array<std::int64_t, 3>> clip_positions(std::int64_t n_frames, int interval) {
  if (interval < 0 || interval > kMaxInterval) {
    throw std::invalid_argument("interval must be in 0.." + std::to_string(kMaxInterval));
  }
  if (n_frames == 1) return {{0, 0, 0}};
  const std::int64_t stride = interval + 1;
  std::vector<std::int64_t> kept;
  for (std::int64_t i = 0; i < n_frames; i += stride) kept.push_back(i);
  if (kept.size() < 3) {
    throw std::invalid_argument("need at least 3 frames after subsampling, have " +
                                std::to_string(kept.size()) + " of " + std::to_string(n_frames));
  }
  std::vector<std::array<std::int64_t, 3>> out;
  for (std::size_t i = 0; i + 2 < kept.size(); ++i) out.push_back({kept[i], kept[i + 1], kept[i + 2]});
  return out;
}

/// Lazily reads clips from a directory of P6 frames (sorted by name).
/// Frames are resized to `size` x `size` when size > 0.
class ClipStream {
 public:
  ClipStream(const std::filesystem::path& dir, int interval, std::int64_t size = 0)
      : paths_(list_images(dir)), size_(size) {
    if (paths_.empty()) throw std::invalid_argument("no images in '" + dir.string() + "'");
    positions_ = clip_positions(static_cast<std::int64_t>(paths_.size()), interval);
  }

  std::size_t size() const { return positions_.size(); }
  bool done() const { return next_ >= positions_.size(); }

  std::optional<FrameClip> next() {
    if (done()) return std::nullopt;
    return at(next_++);
  }

  FrameClip at(std::size_t k) const {
    const auto& pos = positions_.at(k);
    FrameClip c;
    for (int i = 0; i < 3; ++i) {
      const auto& p = paths_[static_cast<std::size_t>(pos[i])];
      Tensor img = read_image(p);
      if (img.dim(0) != 3) throw FormatError(p.string() + ": frames must be RGB (P6)", 0);
      if (i > 0 && size_ <= 0 && img.dims() != c.frames[0].dims()) {
        throw ShapeError("frames of one clip differ in size: " + p.string());
      }
      c.frames[i] = size_ > 0 ? resize_to(img, size_, size_) : std::move(img);
      c.paths[i] = p.string();
      c.indices[i] = pos[i];
    }
    return c;
  }

  const std::vector<std::filesystem::path>& paths() const { return paths_; }

 private:
  std::vector<std::filesystem::path> paths_;
  std::vector<std::array<std::int64_t, 3>> positions_;
  std::int64_t size_;
  std::size_t next_ = 0;
};

inline ClipStream clip_iter(const std::filesystem::path& frames_dir, int interval,
                            std::int64_t size = 0) {
  return ClipStream(frames_dir, interval, size);
}

}  // namespace stvs
