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

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stvs/parallel.hpp"
#include "stvs/tensor.hpp"

namespace stvs {

template <typename T>
struct Conv2dWeights {
  BasicTensor<T> kernel;  // [out_ch, in_ch, kh, kw]
  BasicTensor<T> bias;    // [out_ch]
  std::int64_t dilation = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;

  /// Stride 1 with padding chosen so the spatial size is preserved.
  static Conv2dWeights same(BasicTensor<T> kernel, BasicTensor<T> bias,
                            std::int64_t dilation = 1) {
    Conv2dWeights w{std::move(kernel), std::move(bias), dilation, 1, 0};
    w.padding = (w.kh() - 1) / 2 * dilation;
    w.validate();
    return w;
  }

  std::int64_t out_ch() const { return kernel.dim(0); }
  std::int64_t in_ch() const { return kernel.dim(1); }
  std::int64_t kh() const { return kernel.dim(2); }
  std::int64_t kw() const { return kernel.dim(3); }

  void validate() const {
    if (kernel.rank() != 4) throw ShapeError("conv2d kernel must be rank 4");
    if (bias.rank() != 1 || bias.dim(0) != out_ch()) {
      throw ShapeError("conv2d bias must be [out_ch]");
    }
    if (kh() % 2 == 0 || kw() % 2 == 0) throw ShapeError("conv2d kernel extents must be odd");
    if (dilation < 1 || stride < 1 || padding < 0) {
      throw ShapeError("conv2d: dilation/stride must be >= 1 and padding >= 0");
    }
  }
};

/// 3D kernel whose temporal extent is fixed at 3 frames; spatial padding is
/// always "same" with stride 1.
template <typename T>
struct Conv3dWeights {
  BasicTensor<T> kernel;  // [out_ch, in_ch, 3, kh, kw]
  BasicTensor<T> bias;    // [out_ch]

  std::int64_t out_ch() const { return kernel.dim(0); }
  std::int64_t in_ch() const { return kernel.dim(1); }
  std::int64_t kh() const { return kernel.dim(3); }
  std::int64_t kw() const { return kernel.dim(4); }

  void validate() const {
    if (kernel.rank() != 5 || kernel.dim(2) != 3) {
      throw ShapeError("conv3d kernel must be [out, in, 3, kh, kw], got " +
                       dims_str(kernel.dims()));
    }
    if (bias.rank() != 1 || bias.dim(0) != out_ch()) {
      throw ShapeError("conv3d bias must be [out_ch]");
    }
    if (kh() % 2 == 0 || kw() % 2 == 0) throw ShapeError("conv3d kernel extents must be odd");
  }
};

enum class UpsampleMode { Bilinear, Nearest };

struct ConvGeometry {
  std::int64_t in_h, in_w, out_h, out_w, kh, kw, dilation, stride, padding;

  static std::int64_t out_extent(std::int64_t in, std::int64_t k, std::int64_t dilation,
                                 std::int64_t stride, std::int64_t padding) {
    const std::int64_t span = in + 2 * padding - dilation * (k - 1) - 1;
    if (span < 0) return 0;
    return span / stride + 1;
  }
};

namespace detail {

// Accumulates out[o] = bias[o] + sum_ci sum_ky sum_kx w[o,ci,ky,kx] * in_ci(...)
// with a fixed per-element order (ci outer, ky, kx inner). `packed` is laid
// out [out, ci, kh, kw]. Parallel over output channels only.
template <typename T>
void conv_planes(const std::vector<const T*>& in_planes, const ConvGeometry& g,
                 const T* packed, const T* bias, std::int64_t out_ch, T* out) {
  const auto n_in = static_cast<std::int64_t>(in_planes.size());
  const std::int64_t plane = g.out_h * g.out_w;
  parallel_for(static_cast<std::size_t>(out_ch), [&](std::size_t oi) {
    const auto o = static_cast<std::int64_t>(oi);
    T* dst = out + o * plane;
    std::fill_n(dst, plane, bias[o]);
    for (std::int64_t ci = 0; ci < n_in; ++ci) {
      const T* src = in_planes[ci];
      const T* wk = packed + (o * n_in + ci) * g.kh * g.kw;
      for (std::int64_t ky = 0; ky < g.kh; ++ky) {
        for (std::int64_t kx = 0; kx < g.kw; ++kx) {
          const T wv = wk[ky * g.kw + kx];
          const std::int64_t off_x = kx * g.dilation - g.padding;
          // valid x: 0 <= x*stride + off_x < in_w
          std::int64_t x_lo = off_x >= 0 ? 0 : (-off_x + g.stride - 1) / g.stride;
          std::int64_t x_hi = g.in_w - off_x <= 0 ? 0 : (g.in_w - off_x - 1) / g.stride + 1;
          x_hi = std::min(x_hi, g.out_w);
          if (x_lo >= x_hi) continue;
          for (std::int64_t y = 0; y < g.out_h; ++y) {
            const std::int64_t sy = y * g.stride + ky * g.dilation - g.padding;
            if (sy < 0 || sy >= g.in_h) continue;
            const T* srow = src + sy * g.in_w + off_x;
            T* drow = dst + y * g.out_w;
            if (g.stride == 1) {
              for (std::int64_t x = x_lo; x < x_hi; ++x) drow[x] += wv * srow[x];
            } else {
              for (std::int64_t x = x_lo; x < x_hi; ++x) drow[x] += wv * srow[x * g.stride];
            }
          }
        }
      }
    }
  });
}

// Reorders a [O, C, 3, kh, kw] kernel into [O, 3*C, kh, kw] with input
// channel index t*C + c.
template <typename T>
std::vector<T> pack_conv3d_kernel(const BasicTensor<T>& k) {
  const auto O = k.dim(0), C = k.dim(1), KH = k.dim(3), KW = k.dim(4);
  const auto taps = KH * KW;
  std::vector<T> packed(k.size());
  for (std::int64_t o = 0; o < O; ++o)
    for (std::int64_t t = 0; t < 3; ++t)
      for (std::int64_t c = 0; c < C; ++c) {
        const T* src = k.data().data() + ((o * C + c) * 3 + t) * taps;
        T* dst = packed.data() + ((o * 3 + t) * C + c) * taps;
        std::copy_n(src, taps, dst);
      }
  return packed;
}

}  // namespace detail

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const Conv2dWeights<T>& w) {
  w.validate();
  if (x.rank() != 3) throw ShapeError("conv2d: input must be [C,H,W], got " + dims_str(x.dims()));
  if (x.dim(0) != w.in_ch()) {
    throw ShapeError("conv2d: input has " + std::to_string(x.dim(0)) +
                     " channels, kernel expects " + std::to_string(w.in_ch()));
  }
  ConvGeometry g{x.dim(1), x.dim(2), 0, 0, w.kh(), w.kw(), w.dilation, w.stride, w.padding};
  g.out_h = ConvGeometry::out_extent(g.in_h, g.kh, g.dilation, g.stride, g.padding);
  g.out_w = ConvGeometry::out_extent(g.in_w, g.kw, g.dilation, g.stride, g.padding);
  if (g.out_h < 1 || g.out_w < 1) throw ShapeError("conv2d: non-positive output size");

  std::vector<const T*> planes(static_cast<std::size_t>(x.dim(0)));
  for (std::size_t c = 0; c < planes.size(); ++c) planes[c] = x.data().data() + c * g.in_h * g.in_w;
  BasicTensor<T> out({w.out_ch(), g.out_h, g.out_w});
  detail::conv_planes(planes, g, w.kernel.data().data(), w.bias.data().data(), w.out_ch(),
                      out.data().data());
  return out;
}

/// One output frame of a 3D convolution over a 3-frame window given as raw
/// [C,H,W] plane pointers (they may point into a larger buffer).
template <typename T>
BasicTensor<T> conv3d_window_planes(const std::array<const T*, 3>& frames, std::int64_t C,
                                    std::int64_t H, std::int64_t W, const Conv3dWeights<T>& w,
                                    const std::vector<T>& packed) {
  if (C != w.in_ch()) {
    throw ShapeError("conv3d_window: frames have " + std::to_string(C) +
                     " channels, kernel expects " + std::to_string(w.in_ch()));
  }
  ConvGeometry g{H, W, H, W, w.kh(), w.kw(), 1, 1, (w.kh() - 1) / 2};
  if (w.kh() != w.kw()) throw ShapeError("conv3d_window: square spatial kernels only");
  std::vector<const T*> planes(static_cast<std::size_t>(3 * C));
  for (std::int64_t t = 0; t < 3; ++t)
    for (std::int64_t c = 0; c < C; ++c) planes[t * C + c] = frames[t] + c * H * W;
  BasicTensor<T> out({w.out_ch(), H, W});
  detail::conv_planes(planes, g, packed.data(), w.bias.data().data(), w.out_ch(),
                      out.data().data());
  return out;
}

template <typename T>
BasicTensor<T> conv3d_window(const BasicTensor<T>& f0, const BasicTensor<T>& f1,
                             const BasicTensor<T>& f2, const Conv3dWeights<T>& w) {
  w.validate();
  if (f0.rank() != 3) throw ShapeError("conv3d_window: frames must be [C,H,W]");
  if (f0.dims() != f1.dims() || f0.dims() != f2.dims()) {
    throw ShapeError("conv3d_window: frame shapes disagree");
  }
  const auto packed = detail::pack_conv3d_kernel(w.kernel);
  return conv3d_window_planes<T>({f0.data().data(), f1.data().data(), f2.data().data()},
                                 f0.dim(0), f0.dim(1), f0.dim(2), w, packed);
}

template <typename T>
BasicTensor<T> maxpool2(const BasicTensor<T>& x) {
  if (x.rank() != 3) throw ShapeError("maxpool2: input must be [C,H,W]");
  const auto C = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (H % 2 || W % 2) throw ShapeError("maxpool2: spatial size must be even, got " + dims_str(x.dims()));
  BasicTensor<T> out({C, H / 2, W / 2});
  const T* s = x.data().data();
  T* d = out.data().data();
  for (std::int64_t c = 0; c < C; ++c)
    for (std::int64_t y = 0; y < H / 2; ++y)
      for (std::int64_t xx = 0; xx < W / 2; ++xx) {
        const T* p = s + (c * H + 2 * y) * W + 2 * xx;
        d[(c * (H / 2) + y) * (W / 2) + xx] = std::max(std::max(p[0], p[1]), std::max(p[W], p[W + 1]));
      }
  return out;
}

namespace detail {

struct LerpTap {
  std::int64_t i0, i1;
  double frac;
};

// Half-pixel-center source coordinate, clamped to the valid range.
inline std::vector<LerpTap> lerp_taps(std::int64_t in, std::int64_t out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::int64_t>(std::floor(src));
    const auto i1 = std::min(i0 + 1, in - 1);
    taps[i] = {i0, i1, src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resize in either direction (align_corners = false semantics).
template <typename T>
BasicTensor<T> resize_bilinear(const BasicTensor<T>& x, std::int64_t out_h, std::int64_t out_w) {
  if (x.rank() != 3) throw ShapeError("resize: input must be [C,H,W]");
  if (out_h < 1 || out_w < 1) throw ShapeError("resize: output size must be positive");
  const auto C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const auto ty = detail::lerp_taps(H, out_h);
  const auto tx = detail::lerp_taps(W, out_w);
  BasicTensor<T> out({C, out_h, out_w});
  const T* s = x.data().data();
  T* d = out.data().data();
  for (std::int64_t c = 0; c < C; ++c) {
    const T* p = s + c * H * W;
    for (std::int64_t y = 0; y < out_h; ++y) {
      const auto& a = ty[y];
      for (std::int64_t xx = 0; xx < out_w; ++xx) {
        const auto& b = tx[xx];
        const double top = p[a.i0 * W + b.i0] * (1.0 - b.frac) + p[a.i0 * W + b.i1] * b.frac;
        const double bot = p[a.i1 * W + b.i0] * (1.0 - b.frac) + p[a.i1 * W + b.i1] * b.frac;
        d[(c * out_h + y) * out_w + xx] = static_cast<T>(top * (1.0 - a.frac) + bot * a.frac);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> resize_nearest(const BasicTensor<T>& x, std::int64_t out_h, std::int64_t out_w) {
  if (x.rank() != 3) throw ShapeError("resize: input must be [C,H,W]");
  const auto C = x.dim(0), H = x.dim(1), W = x.dim(2);
  BasicTensor<T> out({C, out_h, out_w});
  for (std::int64_t c = 0; c < C; ++c)
    for (std::int64_t y = 0; y < out_h; ++y) {
      const auto sy = std::min(H - 1, y * H / out_h);
      for (std::int64_t xx = 0; xx < out_w; ++xx) {
        const auto sx = std::min(W - 1, xx * W / out_w);
        out[(c * out_h + y) * out_w + xx] = x[(c * H + sy) * W + sx];
      }
    }
  return out;
}

template <typename T>
BasicTensor<T> upsample(const BasicTensor<T>& x, std::int64_t out_h, std::int64_t out_w,
                        UpsampleMode mode = UpsampleMode::Bilinear) {
  if (x.rank() != 3) throw ShapeError("upsample: input must be [C,H,W]");
  if (out_h < x.dim(1) || out_w < x.dim(2)) {
    throw ShapeError("upsample: cannot downscale " + dims_str(x.dims()) + " to " +
                     std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  return mode == UpsampleMode::Bilinear ? resize_bilinear(x, out_h, out_w)
                                        : resize_nearest(x, out_h, out_w);
}

template <typename T>
BasicTensor<T> upsample_bilinear(const BasicTensor<T>& x, std::int64_t out_h, std::int64_t out_w) {
  return upsample(x, out_h, out_w, UpsampleMode::Bilinear);
}

}  // namespace stvs
