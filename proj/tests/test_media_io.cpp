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

#include <filesystem>
#include <fstream>

#include "oracles.hpp"

namespace fs = std::filesystem;
using stvs::Dims;
using stvs::Tensor;

namespace {

std::vector<char> bytes_of(const std::string& header, std::initializer_list<int> raster) {
  std::vector<char> b(header.begin(), header.end());
  for (int v : raster) b.push_back(static_cast<char>(v));
  return b;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("stvs_media_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::uint64_t format_offset(const std::vector<char>& b) {
  try {
    stvs::decode_pnm(b);
  } catch (const stvs::FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no FormatError";
  return ~0ull;
}

}  // namespace

TEST(Pnm, P6FixtureDecodesExactly) {
  // 2x2: red, green / blue, white.
  auto t = stvs::decode_pnm(bytes_of("P6\n2 2\n255\n", {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255}));
  ASSERT_EQ(t.dims(), (Dims{3, 2, 2}));
  EXPECT_EQ(t.vec(), (std::vector<float>{1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1}));
}

TEST(Pnm, CommentsAndP5) {
  auto t = stvs::decode_pnm(bytes_of("P5 # gray\n3 1 # size\n255\n", {0, 51, 255}));
  ASSERT_EQ(t.dims(), (Dims{1, 1, 3}));
  EXPECT_EQ(t[1], 51.0f / 255.0f);
}

TEST(Pnm, RejectsMalformedInput) {
  EXPECT_EQ(format_offset(bytes_of("P4\n1 1\n255\n", {0})), 0u);
  EXPECT_EQ(format_offset(bytes_of("P5\n1 1\n65535\n", {0, 0})), 7u);
  EXPECT_EQ(format_offset(bytes_of("P5\n2 2\n255\n", {1, 2, 3})), 14u);
  EXPECT_EQ(format_offset(bytes_of("P5\n1 1\n255\n", {1, 2})), 12u);
  EXPECT_EQ(format_offset(bytes_of("P5\nx 1\n255\n", {1})), 3u);
  EXPECT_EQ(format_offset({}), 0u);
}

TEST(Pnm, HalfRoundsUpToByte128) {
  TempDir d("half");
  stvs::write_gray(d.path / "h.pgm", Tensor({1, 3, 2}, 0.5f));
  auto bytes = stvs::read_file_bytes(d.path / "h.pgm");
  ASSERT_EQ(bytes.size(), std::string("P5\n2 3\n255\n").size() + 6);
  // lround(127.5) rounds half away from zero.
  EXPECT_EQ(static_cast<unsigned char>(bytes.back()), 128);
  const auto back = stvs::read_image(d.path / "h.pgm");
  for (float v : back.data()) EXPECT_EQ(v, 128.0f / 255.0f);
}

TEST(Pnm, QuantizedRoundTripIsExact) {
  TempDir d("rt");
  stvs::Xoshiro256 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto H = rng.uniform_int(1, 9), W = rng.uniform_int(1, 9);
    Tensor rgb({3, H, W}), gray({1, H, W});
    for (auto& v : rgb.data()) v = float(rng.uniform_int(0, 255)) / 255.0f;
    for (auto& v : gray.data()) v = float(rng.uniform_int(0, 255)) / 255.0f;
    stvs::write_rgb(d.path / "a.ppm", rgb);
    stvs::write_gray(d.path / "a.pgm", gray);
    EXPECT_TRUE(stvs::bit_equal(stvs::read_image(d.path / "a.ppm"), rgb));
    EXPECT_TRUE(stvs::bit_equal(stvs::read_image(d.path / "a.pgm"), gray));
  }
}

TEST(Pnm, WriteClampsAndChecksShape) {
  TempDir d("clamp");
  stvs::write_gray(d.path / "c.pgm", Tensor({1, 1, 2}, std::vector<float>{-0.5f, 2.0f}));
  EXPECT_EQ(stvs::read_image(d.path / "c.pgm").vec(), (std::vector<float>{0.0f, 1.0f}));
  EXPECT_THROW(stvs::write_gray(d.path / "x.pgm", Tensor({3, 2, 2})), stvs::ShapeError);
  EXPECT_THROW(stvs::write_rgb(d.path / "x.ppm", Tensor({1, 2, 2})), stvs::ShapeError);
  EXPECT_THROW(stvs::read_image(d.path / "missing.ppm"), stvs::IoError);
}

TEST(Clips, PositionsForFiveFrames) {
  using P = std::array<std::int64_t, 3>;
  EXPECT_EQ(stvs::clip_positions(5, 0), (std::vector<P>{{0, 1, 2}, {1, 2, 3}, {2, 3, 4}}));
  EXPECT_EQ(stvs::clip_positions(1, 3), (std::vector<P>{{0, 0, 0}}));
  EXPECT_THROW(stvs::clip_positions(2, 0), std::invalid_argument);
  EXPECT_THROW(stvs::clip_positions(5, 2), std::invalid_argument);
  EXPECT_THROW(stvs::clip_positions(9, 7), std::invalid_argument);
  EXPECT_THROW(stvs::clip_positions(9, -1), std::invalid_argument);
}

TEST(Clips, IndicesStepByIntervalPlusOne) {
  for (int k = 0; k <= stvs::kMaxInterval; ++k) {
    const std::int64_t n = 3 * (k + 1) + 4;
    auto pos = stvs::clip_positions(n, k);
    // Kept frames are 0, k+1, 2(k+1), ...; consecutive windows share two of them.
    EXPECT_EQ(pos.size(), std::size_t((n - 1) / (k + 1) + 1 - 2)) << k;
    for (std::size_t c = 0; c < pos.size(); ++c) {
      EXPECT_EQ(pos[c][0], std::int64_t(c) * (k + 1));
      EXPECT_EQ(pos[c][1] - pos[c][0], k + 1);
      EXPECT_EQ(pos[c][2] - pos[c][1], k + 1);
      EXPECT_LT(pos[c][2], n);
    }
  }
}

TEST(Clips, StreamReadsFramesInNameOrder) {
  TempDir d("stream");
  for (int i = 0; i < 5; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "%03d.ppm", 4 - i);  // written out of order
    stvs::write_rgb(d.path / name, Tensor({3, 4, 6}, float(4 - i) / 255.0f));
  }
  std::ofstream(d.path / "notes.txt") << "ignored";
  auto s = stvs::clip_iter(d.path, 1);
  ASSERT_EQ(s.size(), 1u);
  auto c = s.next();
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->indices, (std::array<std::int64_t, 3>{0, 2, 4}));
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(c->frames[i].dims(), (Dims{3, 4, 6}));
    EXPECT_EQ(c->frames[i][0], float(2 * i) / 255.0f);
    EXPECT_EQ(fs::path(c->paths[i]).filename().string(), "00" + std::to_string(2 * i) + ".ppm");
  }
  EXPECT_FALSE(s.next().has_value());

  auto r = stvs::ClipStream(d.path, 0, 8);
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(r.at(2).frames[0].dims(), (Dims{3, 8, 8}));
}

TEST(Clips, StreamRejectsEmptyAndGrayFrames) {
  TempDir d("bad");
  EXPECT_THROW(stvs::clip_iter(d.path, 0), std::invalid_argument);
  EXPECT_THROW(stvs::clip_iter(d.path / "nope", 0), stvs::IoError);
  stvs::write_gray(d.path / "a.pgm", Tensor({1, 2, 2}));
  EXPECT_THROW(stvs::clip_iter(d.path, 0).at(0), stvs::FormatError);
}

TEST(Resize, ConstantStaysConstant) {
  for (auto [h, w] : {std::pair{4, 4}, std::pair{2, 5}, std::pair{9, 3}}) {
    auto y = stvs::resize_to(Tensor({3, 6, 6}, 0.4f), h, w);
    EXPECT_EQ(y.dims(), (Dims{3, h, w}));
    for (float v : y.data()) EXPECT_FLOAT_EQ(v, 0.4f);
  }
}

TEST(Resize, SameSizeIsIdentity) {
  stvs::Xoshiro256 rng(2);
  auto x = stvs::random_uniform<float>({3, 5, 7}, rng);
  EXPECT_TRUE(stvs::bit_equal(stvs::resize_to(x, 5, 7), x));
}

TEST(Resize, HalvingAveragesTwoByTwoBlocks) {
  stvs::Xoshiro256 rng(3);
  auto x = stvs::random_uniform<float>({3, 16, 12}, rng, 0.0, 1.0);
  auto y = stvs::resize_to(x, 8, 6);
  EXPECT_LE(oracle::rel_err(y, oracle::resize(x, 8, 6)), 1e-6);
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t i = 0; i < 8; ++i)
      for (std::int64_t j = 0; j < 6; ++j) {
        const double avg = (double(x.at({c, 2 * i, 2 * j})) + x.at({c, 2 * i, 2 * j + 1}) +
                            x.at({c, 2 * i + 1, 2 * j}) + x.at({c, 2 * i + 1, 2 * j + 1})) / 4.0;
        EXPECT_NEAR(y.at({c, i, j}), avg, 1e-6);
      }
}

TEST(Resize, RandomSizesMatchOracle) {
  stvs::Xoshiro256 rng(4);
  for (int t = 0; t < 20; ++t) {
    auto x = stvs::random_uniform<float>({2, rng.uniform_int(1, 12), rng.uniform_int(1, 12)}, rng);
    const auto h = rng.uniform_int(1, 12), w = rng.uniform_int(1, 12);
    EXPECT_LE(oracle::rel_err(stvs::resize_to(x, h, w), oracle::resize(x, h, w)), 1e-6);
  }
}

TEST(Flip, InvolutionAndColumnSwap) {
  stvs::Xoshiro256 rng(5);
  auto x = stvs::random_uniform<float>({3, 4, 5}, rng);
  auto f = stvs::hflip(x);
  EXPECT_TRUE(stvs::bit_equal(stvs::hflip(f), x));
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t y = 0; y < 4; ++y)
      for (std::int64_t j = 0; j < 5; ++j) EXPECT_EQ(f.at({c, y, j}), x.at({c, y, 4 - j}));
  Tensor sym({1, 1, 3}, std::vector<float>{0.2f, 0.9f, 0.2f});
  EXPECT_TRUE(stvs::bit_equal(stvs::hflip(sym), sym));
}

TEST(Flip, ClipFlipsFramesAndMask) {
  stvs::Xoshiro256 rng(6);
  stvs::FrameClip c;
  for (auto& f : c.frames) f = stvs::random_uniform<float>({3, 2, 4}, rng);
  c.mask = stvs::random_uniform<float>({1, 2, 4}, rng, 0.0, 1.0);
  auto f = stvs::hflip(c);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(stvs::bit_equal(f.frames[i], stvs::hflip(c.frames[i])));
  ASSERT_TRUE(f.mask.has_value());
  EXPECT_TRUE(stvs::bit_equal(*f.mask, stvs::hflip(*c.mask)));
}
