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

// Median-of-trials microbenchmarks, fast path against its naive oracle.
// Every run checks equivalence on the benchmark inputs before timing and
// executes single-threaded.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvs/network.hpp"
#include "stvs/parallel.hpp"
#include "stvs/reference.hpp"
#include "stvs/rng.hpp"
#include "stvs/temporal_module.hpp"

namespace stvs {

inline constexpr int kMinTrials = 30;
inline constexpr int kWarmup = 5;

struct BenchReport {
  std::string op;
  std::string shape;
  int trials = 0;
  double fast_median_ns = 0;
  double naive_median_ns = 0;   // 0 when there is no naive counterpart
  double speedup = 0;           // naive / fast
  double copy_median_ns = 0;    // shuffle only: plain copy of the same data
  double repeat_median_ns = 0;  // cyclic-pad only: full 9-frame repeat
  double max_rel_err = 0;
  bool equivalent = false;
  double fps = 0;               // forward only

  std::string to_text() const {
    std::ostringstream os;
    os << "op=" << op << " shape=" << shape << " trials=" << trials
       << " fast_median_ns=" << static_cast<std::int64_t>(fast_median_ns);
    if (naive_median_ns > 0) {
      os << " naive_median_ns=" << static_cast<std::int64_t>(naive_median_ns)
         << " speedup=" << speedup;
    }
    if (copy_median_ns > 0) {
      os << " copy_median_ns=" << static_cast<std::int64_t>(copy_median_ns)
         << " vs_copy=" << fast_median_ns / copy_median_ns;
    }
    if (repeat_median_ns > 0) {
      os << " repeat9_median_ns=" << static_cast<std::int64_t>(repeat_median_ns)
         << " repeat9_speedup=" << naive_median_ns / repeat_median_ns;
    }
    if (fps > 0) os << " fps=" << fps;
    os << " max_rel_err=" << max_rel_err << " equivalent=" << (equivalent ? "yes" : "no");
    return os.str();
  }

  static std::string csv_header() {
    return "op,shape,trials,fast_median_ns,naive_median_ns,speedup,copy_median_ns,repeat_median_ns,fps,"
           "max_rel_err,"
           "equivalent";
  }
  std::string to_csv() const {
    std::ostringstream os;
    os << op << ',' << shape << ',' << trials << ',' << fast_median_ns << ',' << naive_median_ns
       << ',' << speedup << ',' << copy_median_ns << ',' << repeat_median_ns << ',' << fps << ',' << max_rel_err << ','
       << (equivalent ? 1 : 0);
    return os.str();
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename F>
double time_ns(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

// Keeps results observable so the timed work cannot be elided.
inline volatile float g_sink = 0.0f;

template <typename T>
void consume(const BasicTensor<T>& t) {
  if (t.size() > 0) g_sink = g_sink + static_cast<float>(t[t.size() / 2]);
}

// Interleaves the timed functions trial by trial so slow drift in machine
// state affects each of them equally.
template <typename... F>
std::vector<double> interleaved_medians(int trials, F&&... fns) {
  if (trials < kMinTrials) {
    throw std::invalid_argument("trials must be >= " + std::to_string(kMinTrials));
  }
  for (int w = 0; w < kWarmup; ++w) (fns(), ...);
  std::vector<std::vector<double>> samples(sizeof...(F));
  for (int t = 0; t < trials; ++t) {
    std::size_t k = 0;
    ((samples[k++].push_back(time_ns(fns))), ...);
  }
  std::vector<double> out;
  for (auto& s : samples) out.push_back(median(std::move(s)));
  return out;
}

inline std::string shape_str(std::int64_t C, std::int64_t H, std::int64_t W) {
  return std::to_string(C) + "x" + std::to_string(H) + "x" + std::to_string(W);
}

}  // namespace detail

/// Cyclic padding alone: the contiguous padded sequence (windows are
/// offsets into it) against per-window slice+concat reorganization. The
/// full 9-frame repeat is timed as well for reference.
inline BenchReport bench_padding(std::int64_t C, std::int64_t H, std::int64_t W, int trials = 30,
                                 std::uint64_t seed = 7) {
  ThreadCountGuard single(1);
  Xoshiro256 rng(seed);
  TemporalBlock<float> block(random_uniform<float>({3, C, H, W}, rng));
  BenchReport r{"cyclic-pad", detail::shape_str(C, H, W), trials};

  const auto seq = padded_sequence(block, PaddingPolicy::CyclicAll, 1);
  const auto full = cyclic_expand(block);
  const auto windows = reference::reorganize_windows(block, PaddingPolicy::CyclicAll, 1);
  r.equivalent = true;
  for (int i = 0; i < 3; ++i) {
    for (const auto& view : {slice_axis(seq, 0, kPaddedWindowOffsets[i], 3),
                             slice_axis(full, 0, kRepeatWindowOffsets[i], 3)}) {
      r.max_rel_err = std::max(r.max_rel_err, max_rel_err(view, windows[i]));
      r.equivalent = r.equivalent && bit_equal(view, windows[i]);
    }
  }
  if (!r.equivalent) return r;

  auto med = detail::interleaved_medians(
      trials, [&] { detail::consume(padded_sequence(block, PaddingPolicy::CyclicAll, 1)); },
      [&] {
        auto w = reference::reorganize_windows(block, PaddingPolicy::CyclicAll, 1);
        detail::consume(w[2]);
      },
      [&] { detail::consume(cyclic_expand(block)); });
  r.fast_median_ns = med[0];
  r.naive_median_ns = med[1];
  r.repeat_median_ns = med[2];
  r.speedup = med[1] / med[0];
  return r;
}

/// temporal_shuffle against the slot-by-slot oracle and a plain copy.
inline BenchReport bench_shuffle(std::int64_t C, std::int64_t H, std::int64_t W, int trials = 30,
                                 std::uint64_t seed = 7) {
  ThreadCountGuard single(1);
  Xoshiro256 rng(seed);
  TemporalBlock<float> block(random_uniform<float>({3, C, H, W}, rng));
  BenchReport r{"shuffle", detail::shape_str(C, H, W), trials};
  const auto fast = temporal_shuffle(block).stacked();
  const auto naive = reference::naive_shuffle(block).stacked();
  r.equivalent = bit_equal(fast, naive);
  r.max_rel_err = max_rel_err(fast, naive);
  if (!r.equivalent) return r;

  auto med = detail::interleaved_medians(
      trials, [&] { detail::consume(temporal_shuffle(block).stacked()); },
      [&] { detail::consume(reference::naive_shuffle(block).stacked()); },
      [&] {
        BasicTensor<float> copy(block.stacked());
        detail::consume(copy);
      });
  r.fast_median_ns = med[0];
  r.naive_median_ns = med[1];
  r.copy_median_ns = med[2];
  r.speedup = med[1] / med[0];
  return r;
}

/// Whole cyclic 3D conv layer (C -> C, 3x3x3): fast path vs reorganize+conv.
inline BenchReport bench_conv3d(std::int64_t C, std::int64_t H, std::int64_t W, int trials = 30,
                                std::uint64_t seed = 7) {
  ThreadCountGuard single(1);
  Xoshiro256 rng(seed);
  TemporalBlock<float> block(random_uniform<float>({3, C, H, W}, rng));
  Conv3dWeights<float> w{random_uniform<float>({C, C, 3, 3, 3}, rng, -0.1, 0.1),
                         random_uniform<float>({C}, rng, -0.1, 0.1)};
  BenchReport r{"conv3d", detail::shape_str(C, H, W), trials};
  const auto fast = tm_conv3d_layer(block, w, PaddingPolicy::CyclicAll, 1).stacked();
  const auto naive = reference::naive_cyclic_conv3d(block, w, PaddingPolicy::CyclicAll, 1).stacked();
  r.max_rel_err = max_rel_err(fast, naive);
  r.equivalent = r.max_rel_err <= 1e-6;
  if (!r.equivalent) return r;

  auto med = detail::interleaved_medians(
      trials, [&] { detail::consume(tm_conv3d_layer(block, w, PaddingPolicy::CyclicAll, 1).stacked()); },
      [&] {
        detail::consume(reference::naive_cyclic_conv3d(block, w, PaddingPolicy::CyclicAll, 1).stacked());
      });
  r.fast_median_ns = med[0];
  r.naive_median_ns = med[1];
  r.speedup = med[1] / med[0];
  return r;
}

/// Full network forward on one random clip; reports frames per second
/// (three frames per clip). Equivalence here means the same clip gives a
/// bit-identical result on two runs.
inline BenchReport bench_forward(const NetworkConfig& cfg, int trials = 30, std::uint64_t seed = 7) {
  ThreadCountGuard single(1);
  const auto weights = NetworkWeights::from_store(init_weights(cfg, seed), cfg);
  Xoshiro256 rng(seed + 1);
  FrameClip clip;
  for (auto& f : clip.frames) f = random_uniform<float>({3, cfg.input_size, cfg.input_size}, rng, 0.0, 1.0);
  BenchReport r{"forward", detail::shape_str(3, cfg.input_size, cfg.input_size), trials};
  const auto a = network_forward(clip, weights, cfg).canonical();
  const auto b = network_forward(clip, weights, cfg).canonical();
  r.equivalent = bit_equal(a, b);
  if (!r.equivalent) return r;
  auto med = detail::interleaved_medians(
      trials, [&] { detail::consume(network_forward(clip, weights, cfg).canonical()); });
  r.fast_median_ns = med[0];
  r.fps = 3.0 * 1e9 / med[0];
  return r;
}

}  // namespace stvs
