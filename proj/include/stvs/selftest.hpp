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

// Runs every fast path against its naive oracle on random inputs.

#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stvs/nn_ops.hpp"
#include "stvs/reference.hpp"
#include "stvs/rng.hpp"
#include "stvs/temporal_module.hpp"
#include "stvs/train.hpp"
#include "stvs/weight_store.hpp"

namespace stvs {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline SuiteResult suite_conv2d(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const auto C = rng.uniform_int(1, 6), O = rng.uniform_int(1, 6);
    const auto H = rng.uniform_int(3, 12), W = rng.uniform_int(3, 12);
    const auto k = 2 * rng.uniform_int(0, 2) + 1, dil = rng.uniform_int(1, 3);
    const auto stride = rng.uniform_int(1, 2);
    Conv2dWeights<float> w{random_uniform<float>({O, C, k, k}, rng), random_uniform<float>({O}, rng),
                           dil, stride, (k - 1) / 2 * dil};
    auto x = random_uniform<float>({C, H, W}, rng);
    worst = std::max(worst, max_rel_err(conv2d(x, w), reference::naive_conv2d(x, w)));
  }
  return {"conv2d", worst <= 1e-6, "max_rel_err=" + std::to_string(worst)};
}

inline SuiteResult suite_conv3d(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const auto C = rng.uniform_int(1, 8), O = rng.uniform_int(1, 8);
    const auto H = rng.uniform_int(3, 16), W = rng.uniform_int(3, 16);
    TemporalBlock<float> block(random_uniform<float>({3, C, H, W}, rng));
    Conv3dWeights<float> w{random_uniform<float>({O, C, 3, 3, 3}, rng),
                           random_uniform<float>({O}, rng)};
    for (auto policy : {PaddingPolicy::ReplicateLayer2, PaddingPolicy::CyclicAll, PaddingPolicy::ZeroPad})
      for (int layer = 1; layer <= 3; ++layer) {
        const auto fast = tm_conv3d_layer(block, w, policy, layer).stacked();
        const auto naive = reference::naive_cyclic_conv3d(block, w, policy, layer).stacked();
        worst = std::max(worst, max_rel_err(fast, naive));
      }
    const std::array<Tensor, 3> f{block.frame(0), block.frame(1), block.frame(2)};
    worst = std::max(worst, max_rel_err(conv3d_window(f[0], f[1], f[2], w),
                                        reference::naive_conv3d_window(f, w)));
  }
  return {"conv3d", worst <= 1e-6, "max_rel_err=" + std::to_string(worst)};
}

inline SuiteResult suite_shuffle(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    const auto C = rng.uniform_int(1, 16), H = rng.uniform_int(1, 8), W = rng.uniform_int(1, 8);
    TemporalBlock<float> block(random_uniform<float>({3, C, H, W}, rng));
    const auto s = temporal_shuffle(block);
    ok = ok && bit_equal(s.stacked(), reference::naive_shuffle(block).stacked());
    ok = ok && bit_equal(temporal_shuffle_inverse(s).stacked(), block.stacked());
  }
  return {"shuffle", ok, ok ? "bit-exact" : "mismatch"};
}

inline SuiteResult suite_weights(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  WeightStore store;
  for (int i = 0; i < 10; ++i) {
    Dims d;
    const auto rank = rng.uniform_int(1, 4);
    for (std::int64_t r = 0; r < rank; ++r) d.push_back(rng.uniform_int(1, 5));
    store.insert("t" + std::to_string(i), random_uniform<float>(d, rng));
  }
  const bool ok = deserialize_weights(serialize_weights(store)) == store;
  return {"weights", ok, ok ? "round trip exact" : "round trip differs"};
}

inline SuiteResult suite_gradcheck(std::uint64_t seed) {
  std::ostringstream os;
  bool ok = true;
  for (const auto& op : gradcheck_ops()) {
    const auto r = fd_gradcheck(op, seed);
    ok = ok && r.pass;
    if (!r.pass) os << op << " rel=" << r.max_rel_err << " abs=" << r.max_abs_err << "; ";
  }
  return {"gradcheck", ok, ok ? "all ops pass" : os.str()};
}

}  // namespace detail

inline std::vector<SuiteResult> run_selftest(std::uint64_t seed = 1) {
  std::vector<std::function<SuiteResult(std::uint64_t)>> suites{
      detail::suite_conv2d, detail::suite_conv3d, detail::suite_shuffle, detail::suite_weights,
      detail::suite_gradcheck};
  std::vector<SuiteResult> out;
  for (const auto& s : suites) {
    try {
      out.push_back(s(seed));
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace stvs
