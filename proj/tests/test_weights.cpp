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

#include <cstring>
#include <filesystem>
#include <limits>

#include "oracles.hpp"

namespace fs = std::filesystem;
using stvs::Tensor;
using stvs::WeightStore;

namespace {

WeightStore random_store(std::uint64_t seed, int n) {
  stvs::Xoshiro256 rng(seed);
  WeightStore w;
  for (int i = 0; i < n; ++i) {
    stvs::Dims d;
    const auto rank = rng.uniform_int(1, 5);
    for (std::int64_t a = 0; a < rank; ++a) d.push_back(rng.uniform_int(1, 4));
    w.insert("t" + std::to_string(i) + "/" + std::to_string(rank), stvs::random_uniform<float>(d, rng, -1e3, 1e3));
  }
  return w;
}

std::uint64_t format_offset(const std::vector<char>& b) {
  try {
    stvs::deserialize_weights(b);
  } catch (const stvs::FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no FormatError";
  return ~0ull;
}

bool stores_bit_equal(const WeightStore& a, const WeightStore& b) {
  if (a.names() != b.names()) return false;
  for (const auto& [k, t] : a)
    if (!stvs::bit_equal(t, b.get(k))) return false;
  return true;
}

}  // namespace

TEST(Weights, RoundTripIsBitExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto w = random_store(seed, 12);
    EXPECT_TRUE(stores_bit_equal(stvs::deserialize_weights(stvs::serialize_weights(w)), w));
  }
}

TEST(Weights, ExtremeFloatsSurvive) {
  WeightStore w;
  w.insert("x", Tensor({4}, std::vector<float>{std::numeric_limits<float>::denorm_min(), -0.0f,
                                               std::numeric_limits<float>::max(), -1.17549435e-38f}));
  auto back = stvs::deserialize_weights(stvs::serialize_weights(w));
  EXPECT_EQ(std::memcmp(back.get("x").data().data(), w.get("x").data().data(), 16), 0);
}

TEST(Weights, EmptyStoreIsTwelveBytes) {
  auto b = stvs::serialize_weights(WeightStore{});
  EXPECT_EQ(b, (std::vector<char>{'S', 'T', 'V', 'S', 1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_TRUE(stvs::deserialize_weights(b).empty());
}

TEST(Weights, KnownLayout) {
  WeightStore w;
  w.insert("ab", Tensor({2}, std::vector<float>{1.0f, -2.0f}));
  auto b = stvs::serialize_weights(w);
  const std::vector<unsigned char> want{'S', 'T', 'V', 'S', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 'a', 'b', 1,
                                        2,   0,   0,   0,   0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0};
  ASSERT_EQ(b.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(b[i]), want[i]) << i;
}

TEST(Weights, HundredTensors) {
  auto w = random_store(9, 100);
  EXPECT_EQ(w.size(), 100u);
  auto back = stvs::deserialize_weights(stvs::serialize_weights(w));
  EXPECT_EQ(back.size(), 100u);
  EXPECT_TRUE(stores_bit_equal(back, w));
}

TEST(Weights, CorruptionReportsOffsets) {
  WeightStore w;
  w.insert("ab", Tensor({2}, std::vector<float>{1.0f, -2.0f}));
  const auto good = stvs::serialize_weights(w);

  auto bad_magic = good;
  bad_magic[1] = 'X';
  EXPECT_EQ(format_offset(bad_magic), 0u);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(format_offset(bad_version), 4u);

  // Cutting anywhere inside the payload is a truncation error at or before the cut.
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    std::vector<char> t(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_LE(format_offset(t), cut) << cut;
  }
  EXPECT_EQ(format_offset(std::vector<char>(good.begin(), good.end() - 1)), 21u);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(format_offset(trailing), good.size());

  auto zero_dim = good;
  zero_dim[17] = 0;
  EXPECT_EQ(format_offset(zero_dim), 17u);

  auto nan = good;
  nan[24] = nan[23] = nan[22] = nan[21] = static_cast<char>(0xff);
  EXPECT_EQ(format_offset(nan), 21u);

  auto huge = good;
  huge[20] = static_cast<char>(0x7f);
  EXPECT_EQ(format_offset(huge), 17u);
}

TEST(Weights, DuplicateNameInFileRejected) {
  WeightStore w;
  w.insert("a", Tensor({1}, 1.0f));
  auto b = stvs::serialize_weights(w);
  const std::vector<char> entry(b.begin() + 12, b.end());
  b.insert(b.end(), entry.begin(), entry.end());
  b[8] = 2;
  EXPECT_EQ(format_offset(b), 12u + entry.size());
}

TEST(Weights, FilesAndErrors) {
  const auto dir = fs::temp_directory_path() / "stvs_weights_files";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto w = random_store(3, 7);
  stvs::save_weights(w, dir / "w.stvs");
  EXPECT_EQ(fs::file_size(dir / "w.stvs"), stvs::serialize_weights(w).size());
  EXPECT_TRUE(stores_bit_equal(stvs::load_weights(dir / "w.stvs"), w));
  EXPECT_THROW(stvs::load_weights(dir / "absent.stvs"), stvs::IoError);
  EXPECT_THROW(stvs::save_weights(w, dir / "no" / "such" / "w.stvs"), stvs::IoError);
  fs::remove_all(dir);
}

TEST(Weights, StoreRules) {
  WeightStore w;
  w.insert("a", Tensor({1}));
  EXPECT_THROW(w.insert("a", Tensor({1})), std::invalid_argument);
  EXPECT_THROW(w.insert("", Tensor({1})), std::invalid_argument);
  EXPECT_THROW(w.insert("n", Tensor({1}, std::numeric_limits<float>::infinity())), std::invalid_argument);
  EXPECT_THROW(w.get("b"), std::out_of_range);
  EXPECT_THROW(w.set("b", Tensor({1})), std::out_of_range);
}

TEST(Weights, NetworkStoreRoundTripGivesSameForward) {
  auto cfg = stvs::NetworkConfig::toy();
  auto store = stvs::init_weights(cfg, 11);
  auto back = stvs::deserialize_weights(stvs::serialize_weights(store));
  EXPECT_TRUE(back == store);
  stvs::Xoshiro256 rng(12);
  stvs::FrameClip clip;
  for (auto& f : clip.frames) f = stvs::random_uniform<float>({3, cfg.input_size, cfg.input_size}, rng, 0.0, 1.0);
  auto a = stvs::network_forward(clip, stvs::NetworkWeights::from_store(store, cfg), cfg).canonical();
  auto b = stvs::network_forward(clip, stvs::NetworkWeights::from_store(back, cfg), cfg).canonical();
  EXPECT_TRUE(stvs::bit_equal(a, b));
}
