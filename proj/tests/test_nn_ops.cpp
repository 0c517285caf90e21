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

#include <gtest/gtest.h>

#include "oracles.hpp"

using stvs::Conv2dWeights;
using stvs::Conv3dWeights;
using stvs::Dims;
using stvs::Tensor;

TEST(Conv2d, IdentityKernel) {
  stvs::Xoshiro256 rng(1);
  auto x = stvs::random_uniform<float>({1, 3, 3}, rng);
  auto w = Conv2dWeights<float>::same(Tensor({1, 1, 1, 1}, 1.0f), Tensor({1}));
  EXPECT_TRUE(stvs::bit_equal(stvs::conv2d(x, w), x));
}

TEST(Conv2d, OnesKernelOnConstant) {
  const float c = 0.75f;
  auto w = Conv2dWeights<float>::same(Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}));
  auto y = stvs::conv2d(Tensor({1, 5, 5}, c), w);
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) EXPECT_FLOAT_EQ(y.at({0, i, j}), 9 * c);
  EXPECT_FLOAT_EQ(y.at({0, 0, 0}), 4 * c);
}

TEST(Conv2d, MatchesLoopOracle) {
  stvs::Xoshiro256 rng(2);
  auto x = stvs::random_uniform<float>({2, 5, 5}, rng);
  auto w = Conv2dWeights<float>::same(stvs::random_uniform<float>({3, 2, 3, 3}, rng),
                                      stvs::random_uniform<float>({3}, rng));
  EXPECT_LE(oracle::rel_err(stvs::conv2d(x, w), oracle::conv2d(x, w.kernel, w.bias, 1, 1, 1)), 1e-6);
}

TEST(Conv2d, RandomShapesDilationStride) {
  stvs::Xoshiro256 rng(3);
  for (int t = 0; t < 40; ++t) {
    const auto C = rng.uniform_int(1, 4), O = rng.uniform_int(1, 4);
    const auto H = rng.uniform_int(1, 8), W = rng.uniform_int(1, 8);
    const auto k = 2 * rng.uniform_int(0, 1) + 1, dil = rng.uniform_int(1, 3);
    const auto stride = rng.uniform_int(1, 2), pad = rng.uniform_int(0, 2);
    if (stvs::ConvGeometry::out_extent(H, k, dil, stride, pad) < 1 ||
        stvs::ConvGeometry::out_extent(W, k, dil, stride, pad) < 1)
      continue;
    Conv2dWeights<float> w{stvs::random_uniform<float>({O, C, k, k}, rng),
                           stvs::random_uniform<float>({O}, rng), dil, stride, pad};
    auto x = stvs::random_uniform<float>({C, H, W}, rng);
    EXPECT_LE(oracle::rel_err(stvs::conv2d(x, w), oracle::conv2d(x, w.kernel, w.bias, dil, stride, pad)),
              1e-6);
  }
}

TEST(Conv2d, SamePaddingKeepsSizeForAllDilations) {
  stvs::Xoshiro256 rng(4);
  auto x = stvs::random_uniform<float>({2, 9, 7}, rng);
  for (auto d : stvs::kAttentionDilations) {
    auto w = Conv2dWeights<float>::same(stvs::random_uniform<float>({1, 2, 3, 3}, rng), Tensor({1}), d);
    EXPECT_EQ(stvs::conv2d(x, w).dims(), (Dims{1, 9, 7}));
  }
}

TEST(Conv2d, LinearInInput) {
  stvs::Xoshiro256 rng(5);
  auto w = Conv2dWeights<float>::same(stvs::random_uniform<float>({3, 2, 3, 3}, rng), Tensor({3}));
  auto x = stvs::random_uniform<float>({2, 6, 6}, rng), y = stvs::random_uniform<float>({2, 6, 6}, rng);
  const float a = 0.7f, b = -1.3f;
  auto lhs = stvs::conv2d(stvs::add(stvs::scale(x, a), stvs::scale(y, b)), w);
  auto rhs = stvs::add(stvs::scale(stvs::conv2d(x, w), a), stvs::scale(stvs::conv2d(y, w), b));
  EXPECT_LE(stvs::max_rel_err(lhs, rhs), 1e-5);
}

TEST(Conv2d, RejectsEvenKernelAndChannelMismatch) {
  EXPECT_THROW(Conv2dWeights<float>::same(Tensor({1, 1, 2, 2}), Tensor({1})), stvs::ShapeError);
  auto w = Conv2dWeights<float>::same(Tensor({1, 2, 3, 3}), Tensor({1}));
  EXPECT_THROW(stvs::conv2d(Tensor({3, 4, 4}), w), stvs::ShapeError);
}

TEST(Conv3dWindow, TemporalIdentity) {
  stvs::Xoshiro256 rng(6);
  const auto C = 3;
  Tensor k({C, C, 3, 3, 3});
  for (int c = 0; c < C; ++c) k.at({c, c, 1, 1, 1}) = 1.0f;
  Conv3dWeights<float> w{k, Tensor({C})};
  auto f0 = stvs::random_uniform<float>({C, 4, 5}, rng), f1 = stvs::random_uniform<float>({C, 4, 5}, rng),
       f2 = stvs::random_uniform<float>({C, 4, 5}, rng);
  EXPECT_TRUE(stvs::bit_equal(stvs::conv3d_window(f0, f1, f2, w), f1));
}

TEST(Conv3dWindow, HandSum) {
  Conv3dWeights<float> w{Tensor({1, 1, 3, 1, 1}, 1.0f), Tensor({1})};
  auto y = stvs::conv3d_window(Tensor({1, 1, 1}, 1.0f), Tensor({1, 1, 1}, 2.0f), Tensor({1, 1, 1}, 3.0f), w);
  EXPECT_FLOAT_EQ(y[0], 6.0f);
}

TEST(Conv3dWindow, MatchesLoopOracle) {
  stvs::Xoshiro256 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto C = rng.uniform_int(1, 4), O = rng.uniform_int(1, 4);
    const auto H = rng.uniform_int(1, 8), W = rng.uniform_int(1, 8);
    Conv3dWeights<float> w{stvs::random_uniform<float>({O, C, 3, 3, 3}, rng), stvs::random_uniform<float>({O}, rng)};
    auto blk = stvs::random_uniform<float>({3, C, H, W}, rng);
    stvs::TemporalBlock<float> b(blk);
    auto got = stvs::conv3d_window(b.frame(0), b.frame(1), b.frame(2), w);
    // Middle output frame under zero padding reads frames 0,1,2 exactly.
    auto want = stvs::slice_axis(oracle::conv3d_layer(blk, w.kernel, w.bias, stvs::PaddingPolicy::ZeroPad, 1), 0, 1, 1);
    EXPECT_LE(oracle::rel_err(stvs::reshape(got, {1, O, H, W}), want), 1e-6);
  }
}

TEST(Conv3dWindow, LinearInInput) {
  stvs::Xoshiro256 rng(8);
  Conv3dWeights<float> w{stvs::random_uniform<float>({2, 2, 3, 3, 3}, rng), Tensor({2})};
  std::array<Tensor, 3> x, y;
  for (auto& f : x) f = stvs::random_uniform<float>({2, 5, 5}, rng);
  for (auto& f : y) f = stvs::random_uniform<float>({2, 5, 5}, rng);
  std::array<Tensor, 3> z;
  for (int i = 0; i < 3; ++i) z[i] = stvs::add(stvs::scale(x[i], 2.0f), stvs::scale(y[i], -0.5f));
  auto lhs = stvs::conv3d_window(z[0], z[1], z[2], w);
  auto rhs = stvs::add(stvs::scale(stvs::conv3d_window(x[0], x[1], x[2], w), 2.0f),
                       stvs::scale(stvs::conv3d_window(y[0], y[1], y[2], w), -0.5f));
  EXPECT_LE(stvs::max_rel_err(lhs, rhs), 1e-5);
}

TEST(MaxPool2, Basic) {
  EXPECT_FLOAT_EQ(stvs::maxpool2(Tensor({1, 2, 2}, std::vector<float>{1, 2, 3, 4}))[0], 4.0f);
  auto c = stvs::maxpool2(Tensor({2, 4, 6}, 1.5f));
  EXPECT_EQ(c.dims(), (Dims{2, 2, 3}));
  for (float v : c.data()) EXPECT_EQ(v, 1.5f);
  EXPECT_THROW(stvs::maxpool2(Tensor({1, 3, 3})), stvs::ShapeError);
}

TEST(Upsample, ConstantStaysConstant) {
  for (auto [h, w] : {std::pair{3, 3}, std::pair{7, 5}, std::pair{16, 16}}) {
    auto y = stvs::upsample_bilinear(Tensor({2, 3, 3}, 0.25f), h, w);
    for (float v : y.data()) EXPECT_FLOAT_EQ(v, 0.25f);
  }
  auto one = stvs::upsample_bilinear(Tensor({1, 1, 1}, 0.8f), 5, 4);
  for (float v : one.data()) EXPECT_FLOAT_EQ(v, 0.8f);
}

TEST(Upsample, TwoByTwoToFourByFourFormula) {
  Tensor x({1, 2, 2}, std::vector<float>{0, 1, 2, 3});
  auto y = stvs::upsample_bilinear(x, 4, 4);
  // Half-pixel centers: output 0 -> source -0.25 -> clamp 0; output 1 -> 0.25.
  const double src[4] = {0.0, 0.25, 0.75, 1.0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(y.at({0, i, j}), 2 * src[i] + src[j], 1e-6);
  EXPECT_LE(oracle::rel_err(y, oracle::resize(x, 4, 4)), 1e-7);
}

TEST(Upsample, StaysWithinInputBounds) {
  stvs::Xoshiro256 rng(10);
  auto x = stvs::random_uniform<float>({3, 5, 4}, rng);
  auto y = stvs::upsample_bilinear(x, 13, 11);
  const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
  for (float v : y.data()) {
    EXPECT_GE(v, *lo);
    EXPECT_LE(v, *hi);
  }
}

TEST(Upsample, RefusesDownscaleNearestFloor) {
  EXPECT_THROW(stvs::upsample_bilinear(Tensor({1, 4, 4}), 2, 2), stvs::ShapeError);
  Tensor x({1, 1, 2}, std::vector<float>{1, 2});
  auto y = stvs::upsample(x, 1, 4, stvs::UpsampleMode::Nearest);
  EXPECT_EQ(y.vec(), (std::vector<float>{1, 1, 2, 2}));
}
