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

#include <atomic>
#include <vector>

#include "oracles.hpp"

using stvs::Dims;
using stvs::Tensor;

namespace {

Tensor iota(Dims d) {
  Tensor t(std::move(d));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i);
  return t;
}

}  // namespace

TEST(Tensor, RejectsBadDims) {
  EXPECT_THROW(Tensor(Dims{}), stvs::ShapeError);
  EXPECT_THROW(Tensor(Dims{2, 0}), stvs::ShapeError);
  EXPECT_THROW(Tensor(Dims{2, 3}, std::vector<float>(5)), stvs::ShapeError);
}

TEST(Tensor, ReshapeKeepsFlatData) {
  auto t = iota({6});
  auto r = stvs::reshape(t, {2, 3});
  EXPECT_EQ(r.dims(), (Dims{2, 3}));
  EXPECT_EQ(r.vec(), t.vec());
  EXPECT_FLOAT_EQ(r.at({1, 0}), 3.0f);
}

TEST(Tensor, ReshapeFlattenRoundTrip) {
  auto t = iota({192});
  EXPECT_TRUE(stvs::bit_equal(stvs::flatten(stvs::reshape(t, {64, 3})), t));
}

TEST(Tensor, ReshapeSizeMismatch) {
  EXPECT_THROW(stvs::reshape(iota({2, 3}), {7}), stvs::ShapeError);
}

TEST(Tensor, MovedReshapeMatchesCopy) {
  auto t = iota({4, 6});
  auto a = stvs::reshape(t, {3, 8});
  auto b = stvs::reshape(Tensor(t), {3, 8});
  EXPECT_TRUE(stvs::bit_equal(a, b));
}

TEST(Tensor, Transpose2Definition) {
  Tensor t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  auto r = stvs::transpose2(t, 0, 1);
  EXPECT_EQ(r.dims(), (Dims{3, 2}));
  EXPECT_EQ(r.vec(), (std::vector<float>{1, 4, 2, 5, 3, 6}));
}

TEST(Tensor, Transpose2Involution) {
  stvs::Xoshiro256 rng(3);
  auto t = stvs::random_uniform<float>({2, 3, 4, 5}, rng);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      EXPECT_TRUE(stvs::bit_equal(stvs::transpose2(stvs::transpose2(t, a, b), a, b), t));
}

TEST(Tensor, Transpose2MatchesIndexFormula) {
  auto t = iota({2, 3, 4});
  auto r = stvs::transpose2(t, 0, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 4; ++k) EXPECT_EQ(r.at({k, j, i}), t.at({i, j, k}));
}

TEST(Tensor, Transpose2AxisError) {
  EXPECT_THROW(stvs::transpose2(iota({4}), 0, 1), stvs::AxisError);
}

TEST(Tensor, RepeatFrameAxis) {
  auto blk = oracle::scalar_frames(1, 2, 3);
  auto r = stvs::repeat_axis(blk, 0, 3);
  EXPECT_EQ(r.dims(), (Dims{9, 1, 1, 1}));
  EXPECT_EQ(r.vec(), (std::vector<float>{1, 2, 3, 1, 2, 3, 1, 2, 3}));
}

TEST(Tensor, RepeatOnceIsIdentity) {
  auto t = iota({3, 2});
  EXPECT_TRUE(stvs::bit_equal(stvs::repeat_axis(t, 1, 1), t));
}

TEST(Tensor, RepeatScalar) {
  Tensor t({1}, 2.5f);
  EXPECT_EQ(stvs::repeat_axis(t, 0, 4).vec(), (std::vector<float>(4, 2.5f)));
}

TEST(Tensor, RepeatThenSliceRecoversEveryBlock) {
  stvs::Xoshiro256 rng(5);
  auto t = stvs::random_uniform<float>({2, 3, 4}, rng);
  for (int axis = 0; axis < 3; ++axis) {
    const auto n = t.dim(axis);
    auto r = stvs::repeat_axis(t, axis, 4);
    for (int b = 0; b < 4; ++b) EXPECT_TRUE(stvs::bit_equal(stvs::slice_axis(r, axis, b * n, n), t));
  }
}

TEST(Tensor, ConcatChannels) {
  auto a = iota({2, 3, 3}), b = iota({3, 3, 3});
  auto c = stvs::concat({a, b}, 0);
  EXPECT_EQ(c.dims(), (Dims{5, 3, 3}));
  EXPECT_TRUE(stvs::bit_equal(stvs::slice_axis(c, 0, 0, 2), a));
  EXPECT_TRUE(stvs::bit_equal(stvs::slice_axis(c, 0, 2, 3), b));
}

TEST(Tensor, ConcatSingleIsIdentity) {
  auto a = iota({2, 3});
  EXPECT_TRUE(stvs::bit_equal(stvs::concat({a}, 1), a));
}

TEST(Tensor, ConcatMismatch) {
  EXPECT_THROW(stvs::concat({iota({2, 3, 3}), iota({2, 4, 3})}, 0), stvs::ShapeError);
}

TEST(Tensor, ConcatInnerAxisThenSlices) {
  stvs::Xoshiro256 rng(9);
  auto a = stvs::random_uniform<float>({3, 2, 4}, rng);
  auto b = stvs::random_uniform<float>({3, 5, 4}, rng);
  auto c = stvs::concat({a, b}, 1);
  EXPECT_TRUE(stvs::bit_equal(stvs::slice_axis(c, 1, 0, 2), a));
  EXPECT_TRUE(stvs::bit_equal(stvs::slice_axis(c, 1, 2, 5), b));
}

TEST(Tensor, SliceBounds) {
  EXPECT_THROW(stvs::slice_axis(iota({4}), 0, 3, 2), stvs::ShapeError);
  EXPECT_THROW(stvs::slice_axis(iota({4}), 1, 0, 1), stvs::AxisError);
}

TEST(Tensor, Elementwise) {
  auto x = iota({2, 2});
  EXPECT_TRUE(stvs::bit_equal(stvs::add(x, Tensor({2, 2})), x));
  Tensor r({2}, std::vector<float>{-1, 2});
  EXPECT_EQ(stvs::relu(r).vec(), (std::vector<float>{0, 2}));
  EXPECT_FLOAT_EQ(stvs::sigmoid(Tensor({1}, 0.0f))[0], 0.5f);
  EXPECT_THROW(stvs::add(iota({2}), iota({3})), stvs::ShapeError);
}

TEST(Tensor, BitEqualSeesSignedZero) {
  EXPECT_FALSE(stvs::bit_equal(Tensor({1}, 0.0f), Tensor({1}, -0.0f)));
}

TEST(Parallel, CoversEveryIndexOnce) {
  for (int threads : {1, 2, 3, 8}) {
    stvs::ThreadCountGuard g(threads);
    std::vector<std::atomic<int>> hits(97);
    stvs::parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Parallel, PropagatesExceptions) {
  stvs::ThreadCountGuard g(4);
  EXPECT_THROW(stvs::parallel_for(16, [](std::size_t i) {
                 if (i == 11) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Rng, DeterministicPerSeed) {
  stvs::Xoshiro256 a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    (void)c();
  }
  EXPECT_NE(stvs::Xoshiro256(42)(), stvs::Xoshiro256(43)());
}

TEST(Rng, UniformRange) {
  stvs::Xoshiro256 r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform(-2.0, 3.0);
    ASSERT_GE(u, -2.0);
    ASSERT_LT(u, 3.0);
    const auto k = r.uniform_int(-3, 3);
    ASSERT_GE(k, -3);
    ASSERT_LE(k, 3);
  }
}
