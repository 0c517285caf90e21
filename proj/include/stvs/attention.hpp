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
#include <vector>

#include "stvs/nn_ops.hpp"
#include "stvs/tensor.hpp"

namespace stvs {

/// Dilations of the four attention branches. A nominal dilation of 0 is
/// the undilated convolution, i.e. dilation 1.
inline constexpr std::array<std::int64_t, 4> kAttentionDilations{1, 2, 4, 6};

template <typename T>
struct AttentionWeights {
  std::array<Conv2dWeights<T>, 4> branch_convs;  // 3x3, dilations kAttentionDilations
  Conv2dWeights<T> fuse_conv;                    // 1x1, 4*branch_ch -> attention channels
};

/// A = relu(fuse(concat_b branch_b(f5))). Every branch is same-padded, so
/// the map keeps the spatial size of f5.
template <typename T>
BasicTensor<T> attention_forward(const BasicTensor<T>& f5, const AttentionWeights<T>& w) {
  std::vector<BasicTensor<T>> branches;
  branches.reserve(4);
  for (const auto& b : w.branch_convs) {
    auto out = conv2d(f5, b);
    if (!branches.empty() && out.dims() != branches.front().dims()) {
      throw ShapeError("attention branches disagree: " + dims_str(out.dims()) + " vs " +
                       dims_str(branches.front().dims()));
    }
    branches.push_back(std::move(out));
  }
  return relu(conv2d(concat(branches, 0), w.fuse_conv));
}

/// feat (x) U(a): the attention map is upsampled to the feature resolution
/// and appended after the feature channels.
template <typename T>
BasicTensor<T> attention_inject(const BasicTensor<T>& feat, const BasicTensor<T>& a,
                                UpsampleMode mode = UpsampleMode::Bilinear) {
  if (feat.rank() != 3 || a.rank() != 3) throw ShapeError("attention_inject: expects [C,H,W]");
  if (a.dim(1) > feat.dim(1) || a.dim(2) > feat.dim(2)) {
    throw ShapeError("attention_inject: attention " + dims_str(a.dims()) +
                     " larger than features " + dims_str(feat.dims()));
  }
  auto up = (a.dim(1) == feat.dim(1) && a.dim(2) == feat.dim(2))
                ? a
                : upsample(a, feat.dim(1), feat.dim(2), mode);
  return concat({feat, up}, 0);
}

}  // namespace stvs
