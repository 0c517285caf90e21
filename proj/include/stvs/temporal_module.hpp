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
#include <cstdint>
#include <string>
#include <vector>

#include "stvs/nn_ops.hpp"
#include "stvs/tensor.hpp"
#include "stvs/trace.hpp"

namespace stvs {

/// Per-frame features of a 3-frame clip, stored frame-major as one
/// contiguous [3, C, H, W] tensor.
template <typename T>
class TemporalBlock {
 public:
  static constexpr std::int64_t kFrames = 3;

  TemporalBlock() : data_({3, 1, 1, 1}) {}

  explicit TemporalBlock(BasicTensor<T> stacked) : data_(std::move(stacked)) {
    if (data_.rank() != 4 || data_.dim(0) != kFrames) {
      throw ShapeError("TemporalBlock expects [3,C,H,W], got " + dims_str(data_.dims()));
    }
  }

  static TemporalBlock from_frames(const BasicTensor<T>& f0, const BasicTensor<T>& f1,
                                   const BasicTensor<T>& f2) {
    if (f0.rank() != 3 || f0.dims() != f1.dims() || f0.dims() != f2.dims()) {
      throw ShapeError("TemporalBlock frames must share a [C,H,W] shape");
    }
    Dims d{1, f0.dim(0), f0.dim(1), f0.dim(2)};
    return TemporalBlock(concat({reshape(f0, d), reshape(f1, d), reshape(f2, d)}, 0));
  }

  std::int64_t channels() const { return data_.dim(1); }
  std::int64_t height() const { return data_.dim(2); }
  std::int64_t width() const { return data_.dim(3); }
  std::size_t frame_size() const {
    return static_cast<std::size_t>(channels() * height() * width());
  }

  const BasicTensor<T>& stacked() const noexcept { return data_; }

  BasicTensor<T> frame(std::int64_t i) const {
    return reshape(slice_axis(data_, 0, i, 1), {channels(), height(), width()});
  }

  const T* frame_ptr(std::int64_t i) const { return data_.data().data() + i * frame_size(); }

  bool operator==(const TemporalBlock& o) const { return data_ == o.data_; }

 private:
  BasicTensor<T> data_;
};

enum class PaddingPolicy {
  ReplicateLayer2,  // cyclic on layers 1 and 3+, edge-replicate on layer 2
  CyclicAll,   // (T[i-1 mod 3], T[i], T[i+1 mod 3]) on every layer
  ZeroPad,     // out-of-range neighbours are zero frames
};

inline std::string to_string(PaddingPolicy p) {
  switch (p) {
    case PaddingPolicy::ReplicateLayer2: return "replicate-l2";
    case PaddingPolicy::CyclicAll: return "cyclic";
    case PaddingPolicy::ZeroPad: return "zero";
  }
  return "?";
}

inline PaddingPolicy padding_policy_from_string(const std::string& s) {
  if (s == "replicate-l2" || s == "ReplicateLayer2") return PaddingPolicy::ReplicateLayer2;
  if (s == "cyclic" || s == "CyclicAll") return PaddingPolicy::CyclicAll;
  if (s == "zero" || s == "ZeroPad") return PaddingPolicy::ZeroPad;
  throw std::invalid_argument("unknown padding policy '" + s + "'");
}

/// How a layer's padded input sequence is built.
enum class PadScheme { Cyclic, Replicate, Zero };

inline PadScheme pad_scheme(PaddingPolicy policy, int layer_index) {
  switch (policy) {
    case PaddingPolicy::CyclicAll: return PadScheme::Cyclic;
    case PaddingPolicy::ZeroPad: return PadScheme::Zero;
    case PaddingPolicy::ReplicateLayer2:
      return layer_index == 2 ? PadScheme::Replicate : PadScheme::Cyclic;
  }
  return PadScheme::Cyclic;
}

/// Repeating the block 3 times along the frame axis gives
/// [T1,T2,T3,T1,T2,T3,T1,T2,T3]; 3-wide windows starting at offsets 2, 3, 4
/// are the cyclically padded windows of frames 1, 2, 3.
inline constexpr std::array<std::int64_t, 3> kRepeatWindowOffsets{2, 3, 4};

/// Window offsets into a 5-frame padded sequence [lo, T1, T2, T3, hi].
inline constexpr std::array<std::int64_t, 3> kPaddedWindowOffsets{0, 1, 2};

/// [T1,T2,T3] -> [T1,T2,T3,T1,T2,T3,T1,T2,T3].
template <typename T>
BasicTensor<T> cyclic_expand(const TemporalBlock<T>& block) {
  return repeat_axis(block.stacked(), 0, 3);
}

/// [lo, T1, T2, T3, hi] for the scheme in force at `layer_index`.
template <typename T>
BasicTensor<T> padded_sequence(const TemporalBlock<T>& block, PaddingPolicy policy,
                               int layer_index) {
  const auto scheme = pad_scheme(policy, layer_index);
  const auto fs = block.frame_size();
  detail::Appender<T> seq(5 * fs);
  // Cyclic: frames 2..6 of cyclic_expand, the only ones its windows read.
  if (scheme == PadScheme::Cyclic) seq.append(block.frame_ptr(2), fs);
  else if (scheme == PadScheme::Zero) seq.append_zeros(fs);
  else seq.append(block.frame_ptr(0), fs);
  seq.append(block.stacked().data().data(), 3 * fs);
  if (scheme == PadScheme::Cyclic) seq.append(block.frame_ptr(0), fs);
  else if (scheme == PadScheme::Zero) seq.append_zeros(fs);
  else seq.append(block.frame_ptr(2), fs);
  return std::move(seq).finish({5, block.channels(), block.height(), block.width()});
}

namespace detail {

template <typename T>
void conv3d_window_into(const std::array<const T*, 3>& frames, std::int64_t C, std::int64_t H,
                        std::int64_t W, const Conv3dWeights<T>& w, const std::vector<T>& packed,
                        T* out) {
  ConvGeometry g{H, W, H, W, w.kh(), w.kw(), 1, 1, (w.kh() - 1) / 2};
  std::vector<const T*> planes(static_cast<std::size_t>(3 * C));
  for (std::int64_t t = 0; t < 3; ++t)
    for (std::int64_t c = 0; c < C; ++c) planes[t * C + c] = frames[t] + c * H * W;
  conv_planes(planes, g, packed.data(), w.bias.data().data(), w.out_ch(), out);
}

}  // namespace detail

/// One sequential 3D convolution over the 3-frame block. The padded frame
/// sequence is laid out contiguously and each output frame convolves a
/// window that is a plain sub-range of it; no per-window copies are made.
template <typename T>
TemporalBlock<T> tm_conv3d_layer(const TemporalBlock<T>& block, const Conv3dWeights<T>& w,
                                 PaddingPolicy policy, int layer_index) {
  w.validate();
  if (w.kh() != w.kw()) throw ShapeError("tm_conv3d_layer: square spatial kernels only");
  const auto C = block.channels(), H = block.height(), W = block.width();
  if (C != w.in_ch()) {
    throw ShapeError("tm_conv3d_layer: block has " + std::to_string(C) +
                     " channels, kernel expects " + std::to_string(w.in_ch()));
  }

  const auto fs = block.frame_size();
  const auto sequence = padded_sequence(block, policy, layer_index);
  const auto packed = detail::pack_conv3d_kernel(w.kernel);
  const auto O = w.out_ch();
  BasicTensor<T> out({3, O, H, W});
  const T* base = sequence.data().data();
  for (std::int64_t i = 0; i < 3; ++i) {
    const T* win = base + kPaddedWindowOffsets[i] * fs;
    detail::conv3d_window_into<T>({win, win + fs, win + 2 * fs}, C, H, W, w, packed,
                                  out.data().data() + i * O * H * W);
  }
  return TemporalBlock<T>(std::move(out));
}

/// st[i] + conv2d(src[i]) for each frame.
template <typename T>
TemporalBlock<T> residual_fix(const TemporalBlock<T>& st, const TemporalBlock<T>& src,
                              const Conv2dWeights<T>& w) {
  if (st.height() != src.height() || st.width() != src.width()) {
    throw ShapeError("residual_fix: spatial size mismatch");
  }
  std::vector<BasicTensor<T>> frames;
  frames.reserve(3);
  for (std::int64_t i = 0; i < 3; ++i) {
    auto c = conv2d(src.frame(i), w);
    auto f = st.frame(i);
    if (c.dims() != f.dims()) {
      throw ShapeError("residual_fix: conv output " + dims_str(c.dims()) +
                       " does not match " + dims_str(f.dims()));
    }
    frames.push_back(add(f, c));
  }
  return TemporalBlock<T>::from_frames(frames[0], frames[1], frames[2]);
}

namespace detail {

// Views the 3C channel slots as [rows, cols] and writes the transpose
// [cols, rows]; each slot's spatial plane moves as one contiguous run.
template <typename T>
TemporalBlock<T> transpose_slots(const TemporalBlock<T>& block, std::int64_t rows,
                                 std::int64_t cols) {
  const auto plane = static_cast<std::size_t>(block.height() * block.width());
  const T* src = block.stacked().data().data();
  Appender<T> out(block.stacked().size());
  for (std::int64_t c = 0; c < cols; ++c)
    for (std::int64_t r = 0; r < rows; ++r) out.append(src + (r * cols + c) * plane, plane);
  return TemporalBlock<T>(std::move(out).finish(block.stacked().dims()));
}

}  // namespace detail

/// Interleaves channels across frames: with the 3C per-location channel
/// slots laid out frame-major, output slot i*C + j takes input slot 3j + i.
/// This is reshape [3C] -> [C,3], transpose -> [3,C], flatten.
template <typename T>
TemporalBlock<T> temporal_shuffle(const TemporalBlock<T>& block) {
  return detail::transpose_slots(block, block.channels(), 3);
}

/// Inverse of temporal_shuffle: output slot 3j + i takes input slot i*C + j.
template <typename T>
TemporalBlock<T> temporal_shuffle_inverse(const TemporalBlock<T>& block) {
  return detail::transpose_slots(block, 3, block.channels());
}

template <typename T>
struct TemporalModuleWeights {
  std::vector<Conv3dWeights<T>> conv3d;  // one per sequential layer
  std::vector<Conv2dWeights<T>> res2d;   // residual 2D conv per layer

  std::size_t num_layers() const { return conv3d.size(); }
};

struct TemporalOptions {
  PaddingPolicy policy = PaddingPolicy::ReplicateLayer2;
  int num_conv_layers = 3;
  bool shuffle_enabled = true;
  bool residual_on_last = true;
};

/// ST = Conv3D(S(Conv3D(S(Conv3D(T))))) for three layers, each 3D conv
/// followed by its residual 2D correction. S runs after every non-final
/// layer when enabled.
template <typename T>
TemporalBlock<T> temporal_module_forward(const TemporalBlock<T>& block,
                                         const TemporalModuleWeights<T>& w,
                                         const TemporalOptions& opts = {},
                                         OpTrace* trace = nullptr,
                                         const std::string& scope = "tm") {
  const int L = opts.num_conv_layers;
  if (L != 1 && L != 3 && L != 5) {
    throw ShapeError("temporal module supports 1, 3 or 5 conv layers, got " + std::to_string(L));
  }
  if (w.conv3d.size() != static_cast<std::size_t>(L) ||
      w.res2d.size() != static_cast<std::size_t>(L)) {
    throw ShapeError("temporal module weights sized for " + std::to_string(w.conv3d.size()) +
                     " layers, options request " + std::to_string(L));
  }
  TemporalBlock<T> x = block;
  for (int l = 0; l < L; ++l) {
    if (w.conv3d[l].out_ch() != x.channels()) {
      throw ShapeError("temporal module convs must preserve the channel count");
    }
    auto st = tm_conv3d_layer(x, w.conv3d[l], opts.policy, l + 1);
    trace_op(trace, scope, "tm.conv3d");
    const bool last = l == L - 1;
    if (!last || opts.residual_on_last) {
      st = residual_fix(st, x, w.res2d[l]);
      trace_op(trace, scope, "tm.residual");
    }
    if (opts.shuffle_enabled && !last) {
      st = temporal_shuffle(st);
      trace_op(trace, scope, "tm.shuffle");
    }
    x = std::move(st);
  }
  return x;
}

}  // namespace stvs
