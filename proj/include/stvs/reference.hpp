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

// Slow reference paths. These exist to be compared against the fast paths
// and to give the benchmarks a conventional baseline.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stvs/nn_ops.hpp"
#include "stvs/temporal_module.hpp"

namespace stvs::reference {

/// Source frame per window position for output frame i; -1 means a zero frame.
inline std::array<int, 3> window_sources(PaddingPolicy policy, int layer_index, int i) {
  const int prev = i - 1, next = i + 1;
  switch (pad_scheme(policy, layer_index)) {
    case PadScheme::Cyclic: return {(prev + 3) % 3, i, next % 3};
    case PadScheme::Replicate: return {prev < 0 ? 0 : prev, i, next > 2 ? 2 : next};
    case PadScheme::Zero: return {prev < 0 ? -1 : prev, i, next > 2 ? -1 : next};
  }
  return {prev, i, next};
}

/// Conventional reorganization: each window is assembled by slicing the
/// needed frames out of the block and concatenating them into a fresh
/// [3,C,H,W] tensor.
template <typename T>
std::array<BasicTensor<T>, 3> reorganize_windows(const TemporalBlock<T>& block,
                                                 PaddingPolicy policy, int layer_index) {
  const Dims frame_dims{1, block.channels(), block.height(), block.width()};
  std::array<BasicTensor<T>, 3> windows;
  for (int i = 0; i < 3; ++i) {
    std::vector<BasicTensor<T>> parts;
    parts.reserve(3);
    for (int src : window_sources(policy, layer_index, i)) {
      parts.push_back(src < 0 ? BasicTensor<T>(frame_dims)
                              : slice_axis(block.stacked(), 0, src, 1));
    }
    windows[i] = concat(parts, 0);
  }
  return windows;
}

template <typename T>
TemporalBlock<T> naive_cyclic_conv3d(const TemporalBlock<T>& block, const Conv3dWeights<T>& w,
                                     PaddingPolicy policy, int layer_index) {
  const Dims fd{block.channels(), block.height(), block.width()};
  auto windows = reorganize_windows(block, policy, layer_index);
  std::vector<BasicTensor<T>> outs;
  for (const auto& win : windows) {
    auto f0 = reshape(slice_axis(win, 0, 0, 1), fd);
    auto f1 = reshape(slice_axis(win, 0, 1, 1), fd);
    auto f2 = reshape(slice_axis(win, 0, 2, 1), fd);
    outs.push_back(conv3d_window(f0, f1, f2, w));
  }
  return TemporalBlock<T>::from_frames(outs[0], outs[1], outs[2]);
}

/// Slot-by-slot shuffle: out[i*C + j] = in[3j + i], element loop.
template <typename T>
TemporalBlock<T> naive_shuffle(const TemporalBlock<T>& block) {
  const auto C = block.channels();
  const auto plane = block.height() * block.width();
  BasicTensor<T> out(block.stacked().dims());
  const T* in = block.stacked().data().data();
  T* dst = out.data().data();
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < C; ++j) {
      const std::int64_t to = i * C + j, from = 3 * j + i;
      for (std::int64_t p = 0; p < plane; ++p) dst[to * plane + p] = in[from * plane + p];
    }
  return TemporalBlock<T>(std::move(out));
}

/// Direct-formula 2D convolution. Out-of-range taps read zero.
template <typename T>
BasicTensor<T> naive_conv2d(const BasicTensor<T>& x, const Conv2dWeights<T>& w) {
  const auto C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const auto Ho = ConvGeometry::out_extent(H, w.kh(), w.dilation, w.stride, w.padding);
  const auto Wo = ConvGeometry::out_extent(W, w.kw(), w.dilation, w.stride, w.padding);
  BasicTensor<T> out({w.out_ch(), Ho, Wo});
  for (std::int64_t o = 0; o < w.out_ch(); ++o)
    for (std::int64_t y = 0; y < Ho; ++y)
      for (std::int64_t xx = 0; xx < Wo; ++xx) {
        T acc = w.bias[o];
        for (std::int64_t c = 0; c < C; ++c)
          for (std::int64_t ky = 0; ky < w.kh(); ++ky)
            for (std::int64_t kx = 0; kx < w.kw(); ++kx) {
              const auto sy = y * w.stride + ky * w.dilation - w.padding;
              const auto sx = xx * w.stride + kx * w.dilation - w.padding;
              if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
              acc += w.kernel.at({o, c, ky, kx}) * x.at({c, sy, sx});
            }
        out.at({o, y, xx}) = acc;
      }
  return out;
}

template <typename T>
BasicTensor<T> naive_conv3d_window(const std::array<BasicTensor<T>, 3>& frames,
                                   const Conv3dWeights<T>& w) {
  const auto C = frames[0].dim(0), H = frames[0].dim(1), W = frames[0].dim(2);
  const auto pad = (w.kh() - 1) / 2;
  BasicTensor<T> out({w.out_ch(), H, W});
  for (std::int64_t o = 0; o < w.out_ch(); ++o)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        T acc = w.bias[o];
        for (std::int64_t t = 0; t < 3; ++t)
          for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t ky = 0; ky < w.kh(); ++ky)
              for (std::int64_t kx = 0; kx < w.kw(); ++kx) {
                const auto sy = y + ky - pad, sx = xx + kx - pad;
                if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
                acc += w.kernel.at({o, c, t, ky, kx}) * frames[t].at({c, sy, sx});
              }
        out.at({o, y, xx}) = acc;
      }
  return out;
}

}  // namespace stvs::reference
