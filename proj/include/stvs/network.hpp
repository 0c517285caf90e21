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

// Full spatiotemporal saliency network.
//
// Stage numbering: encoder stage k (1..5) runs at input_size / 2^(k-1).
// Decoder stages run coarse to fine, d = 5, 4, ..., 1, and stage d runs at
// the same resolution as encoder stage k = d. Decoder stage 1 produces the
// final full-resolution map.
//
// Weight names:
//   encoder.s{k}.conv{1,2}.{kernel,bias}
//   attention.branch{0..3}.{kernel,bias}, attention.fuse.{kernel,bias}
//   decoder.s{d}.conv_a.*, decoder.s{d}.conv_b.*, decoder.s{d}.side.*
//   decoder.s{d}.tm.conv3d_{l}.*, decoder.s{d}.tm.res2d_{l}.*   (l = 1..L)

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stvs/attention.hpp"
#include "stvs/nn_ops.hpp"
#include "stvs/rng.hpp"
#include "stvs/temporal_module.hpp"
#include "stvs/tensor.hpp"
#include "stvs/trace.hpp"
#include "stvs/weight_store.hpp"

namespace stvs {

inline constexpr int kNumStages = 5;

struct NetworkConfig {
  std::int64_t input_size = 256;
  std::array<std::int64_t, kNumStages> encoder_channels{64, 128, 256, 512, 1024};
  std::int64_t tm_channels = 64;
  std::int64_t attention_channels = 64;
  PaddingPolicy padding_policy = PaddingPolicy::ReplicateLayer2;
  int num_tm_convs = 3;
  bool shuffle_enabled = true;
  bool attention_enabled = true;
  bool temporal_enabled = true;
  bool residual_on_last = true;
  UpsampleMode upsample_mode = UpsampleMode::Bilinear;

  /// Desk-scale configuration used by tests and benchmarks.
  static NetworkConfig toy() {
    NetworkConfig c;
    c.input_size = 64;
    c.encoder_channels = {8, 16, 32, 64, 64};
    c.tm_channels = 16;
    c.attention_channels = 16;
    return c;
  }

  void validate() const {
    if (input_size < 16 || input_size % 16 != 0) {
      throw std::invalid_argument("input_size must be a positive multiple of 16");
    }
    for (auto c : encoder_channels) {
      if (c < 1) throw std::invalid_argument("encoder channels must be >= 1");
    }
    if (tm_channels < 1 || attention_channels < 1) {
      throw std::invalid_argument("tm/attention channels must be >= 1");
    }
    if (num_tm_convs != 1 && num_tm_convs != 3 && num_tm_convs != 5) {
      throw std::invalid_argument("num_tm_convs must be 1, 3 or 5");
    }
  }

  TemporalOptions temporal_options() const {
    return {padding_policy, num_tm_convs, shuffle_enabled, residual_on_last};
  }

  std::int64_t stage_size(int d) const { return input_size >> (d - 1); }
};

struct FrameClip {
  std::array<Tensor, 3> frames;  // [3,H,W] RGB in [0,1]
  std::array<std::string, 3> paths;
  std::array<std::int64_t, 3> indices{0, 1, 2};
  std::optional<Tensor> mask;  // [1,H,W], supervised clips only
};

/// Side saliency maps: maps[d-1][i] is decoder stage d, frame i, [1,H_d,W_d].
struct SaliencyResult {
  std::array<std::array<Tensor, 3>, kNumStages> maps;

  const Tensor& stage(int d, int frame) const { return maps.at(d - 1).at(frame); }
  /// Finest stage, middle frame.
  const Tensor& canonical() const { return maps[0][1]; }
};

// ---------------------------------------------------------------------------
// Weight schema

struct WeightSpec {
  std::string name;
  Dims dims;
  double init_bound;  // kernels: U(-b, b); biases: 0
};

namespace detail {

inline void push_conv(std::vector<WeightSpec>& out, const std::string& prefix, std::int64_t o,
                      std::int64_t i, std::int64_t k, double gain) {
  const double fan_in = static_cast<double>(i * k * k);
  out.push_back({prefix + ".kernel", {o, i, k, k}, std::sqrt(3.0 * gain / fan_in)});
  out.push_back({prefix + ".bias", {o}, 0.0});
}

inline void push_conv3d(std::vector<WeightSpec>& out, const std::string& prefix, std::int64_t c,
                        double gain) {
  const double fan_in = static_cast<double>(c * 3 * 9);
  out.push_back({prefix + ".kernel", {c, c, 3, 3, 3}, std::sqrt(3.0 * gain / fan_in)});
  out.push_back({prefix + ".bias", {c}, 0.0});
}

inline std::string stage_prefix(const char* part, int s) {
  return std::string(part) + ".s" + std::to_string(s);
}

}  // namespace detail

/// Every parameter of the configured network, in initialization order:
/// encoder s1..s5, attention, then decoder s5..s1.
///
/// Kernels use a uniform He-style init with variance gain/fan_in: gain 2 for
/// convs followed by ReLU, gain 1 for the linear side heads, and gain 1/2
/// for each of the two summed branches (3D conv, residual 2D conv) inside
/// the temporal module.
inline std::vector<WeightSpec> weight_specs(const NetworkConfig& cfg) {
  cfg.validate();
  std::vector<WeightSpec> specs;
  const auto& ec = cfg.encoder_channels;
  std::int64_t in = 3;
  for (int k = 1; k <= kNumStages; ++k) {
    const auto p = detail::stage_prefix("encoder", k);
    detail::push_conv(specs, p + ".conv1", ec[k - 1], in, 3, 2.0);
    detail::push_conv(specs, p + ".conv2", ec[k - 1], ec[k - 1], 3, 2.0);
    in = ec[k - 1];
  }
  if (cfg.attention_enabled) {
    for (int b = 0; b < 4; ++b) {
      detail::push_conv(specs, "attention.branch" + std::to_string(b), cfg.attention_channels,
                        ec[4], 3, 1.0);
    }
    detail::push_conv(specs, "attention.fuse", cfg.attention_channels,
                      4 * cfg.attention_channels, 1, 2.0);
  }
  const auto C = cfg.tm_channels;
  for (int d = kNumStages; d >= 1; --d) {
    const auto p = detail::stage_prefix("decoder", d);
    const std::int64_t a_in = ec[d - 1] + (d < kNumStages ? C : 0);
    detail::push_conv(specs, p + ".conv_a", C, a_in, 3, 2.0);
    detail::push_conv(specs, p + ".conv_b", C, C + (cfg.attention_enabled ? cfg.attention_channels : 0),
                      3, 2.0);
    if (cfg.temporal_enabled) {
      for (int l = 1; l <= cfg.num_tm_convs; ++l) {
        detail::push_conv3d(specs, p + ".tm.conv3d_" + std::to_string(l), C, 0.5);
        detail::push_conv(specs, p + ".tm.res2d_" + std::to_string(l), C, C, 3, 0.5);
      }
    }
    detail::push_conv(specs, p + ".side", 1, C, 1, 1.0);
  }
  return specs;
}

/// Deterministic parameters from a single xoshiro256** stream seeded with
/// `seed`, consumed in weight_specs order (kernel values in row-major order);
/// biases are zero and consume no draws.
inline WeightStore init_weights(const NetworkConfig& cfg, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  WeightStore store;
  for (const auto& s : weight_specs(cfg)) {
    Tensor t(s.dims);
    if (s.init_bound > 0.0) {
      for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-s.init_bound, s.init_bound));
    }
    store.insert(s.name, std::move(t));
  }
  return store;
}

/// Checks that every expected parameter exists with the expected shape.
inline void check_weights(const WeightStore& store, const NetworkConfig& cfg) {
  for (const auto& s : weight_specs(cfg)) {
    if (!store.contains(s.name)) throw std::out_of_range("missing weight '" + s.name + "'");
    if (store.get(s.name).dims() != s.dims) {
      throw ShapeError("weight '" + s.name + "' has dims " + dims_str(store.get(s.name).dims()) +
                       ", expected " + dims_str(s.dims));
    }
  }
}

// ---------------------------------------------------------------------------
// Typed views

inline Conv2dWeights<float> load_conv2d(const WeightStore& s, const std::string& prefix,
                                        std::int64_t dilation = 1) {
  return Conv2dWeights<float>::same(s.get(prefix + ".kernel"), s.get(prefix + ".bias"), dilation);
}

inline Conv3dWeights<float> load_conv3d(const WeightStore& s, const std::string& prefix) {
  Conv3dWeights<float> w{s.get(prefix + ".kernel"), s.get(prefix + ".bias")};
  w.validate();
  return w;
}

struct EncoderWeights {
  std::array<std::array<Conv2dWeights<float>, 2>, kNumStages> convs;
};

struct DecoderStageWeights {
  Conv2dWeights<float> conv_a, conv_b, side;
  TemporalModuleWeights<float> tm;
};

struct NetworkWeights {
  EncoderWeights encoder;
  std::optional<AttentionWeights<float>> attention;
  std::array<DecoderStageWeights, kNumStages> decoder;  // index d-1

  static NetworkWeights from_store(const WeightStore& s, const NetworkConfig& cfg) {
    check_weights(s, cfg);
    NetworkWeights w;
    for (int k = 1; k <= kNumStages; ++k) {
      const auto p = detail::stage_prefix("encoder", k);
      w.encoder.convs[k - 1] = {load_conv2d(s, p + ".conv1"), load_conv2d(s, p + ".conv2")};
    }
    if (cfg.attention_enabled) {
      AttentionWeights<float> a;
      for (int b = 0; b < 4; ++b) {
        a.branch_convs[b] = load_conv2d(s, "attention.branch" + std::to_string(b),
                                        kAttentionDilations[b]);
      }
      a.fuse_conv = load_conv2d(s, "attention.fuse");
      w.attention = std::move(a);
    }
    for (int d = 1; d <= kNumStages; ++d) {
      const auto p = detail::stage_prefix("decoder", d);
      auto& st = w.decoder[d - 1];
      st.conv_a = load_conv2d(s, p + ".conv_a");
      st.conv_b = load_conv2d(s, p + ".conv_b");
      st.side = load_conv2d(s, p + ".side");
      if (cfg.temporal_enabled) {
        for (int l = 1; l <= cfg.num_tm_convs; ++l) {
          st.tm.conv3d.push_back(load_conv3d(s, p + ".tm.conv3d_" + std::to_string(l)));
          st.tm.res2d.push_back(load_conv2d(s, p + ".tm.res2d_" + std::to_string(l)));
        }
      }
    }
    return w;
  }
};

// ---------------------------------------------------------------------------
// Forward

using FeaturePyramid = std::array<Tensor, kNumStages>;

/// Stage k: two 3x3 conv+ReLU; stages 1-4 are followed by a 2x2 max-pool
/// feeding the next stage. Returns F_1..F_5 (pre-pool features).
inline FeaturePyramid encoder_forward(const Tensor& frame, const EncoderWeights& w,
                                      std::int64_t input_size, OpTrace* trace = nullptr) {
  if (frame.dims() != Dims{3, input_size, input_size}) {
    throw ShapeError("encoder expects [3," + std::to_string(input_size) + "," +
                     std::to_string(input_size) + "], got " + dims_str(frame.dims()));
  }
  FeaturePyramid f;
  Tensor x = frame;
  for (int k = 0; k < kNumStages; ++k) {
    if (k > 0) {
      x = maxpool2(f[k - 1]);
      trace_op(trace, "encoder", "maxpool2");
    }
    x = relu(conv2d(x, w.convs[k][0]));
    x = relu(conv2d(x, w.convs[k][1]));
    trace_op(trace, "encoder", "conv2d");
    trace_op(trace, "encoder", "conv2d");
    f[k] = x;
  }
  return f;
}

struct DecoderStageOutput {
  TemporalBlock<float> pre_tm;  // X: features entering the temporal module
  TemporalBlock<float> st;      // ST: temporal module output
  std::optional<std::array<Tensor, 3>> recurrent;  // R_d, 2x the stage size
  std::array<Tensor, 3> side;
};

/// X_i = relu(conv_b(relu(conv_a(F_i (x) R_i)) (x) U(A_i))), ST = TM(X),
/// R_i = U2x(ST_i + X_i), side_i = sigmoid(side(ST_i)). Without R the inner
/// concat is skipped; without attention the outer one is.
inline DecoderStageOutput decoder_stage(const std::array<Tensor, 3>& features,
                                        const std::optional<std::array<Tensor, 3>>& recurrent,
                                        const std::optional<std::array<Tensor, 3>>& attention,
                                        const DecoderStageWeights& w, const NetworkConfig& cfg,
                                        bool emit_recurrent, OpTrace* trace = nullptr,
                                        const std::string& scope = "decoder") {
  std::array<Tensor, 3> x;
  for (int i = 0; i < 3; ++i) {
    Tensor in = features[i];
    if (recurrent) {
      const auto& r = (*recurrent)[i];
      if (r.dim(1) != in.dim(1) || r.dim(2) != in.dim(2)) {
        throw ShapeError("decoder: recurrent " + dims_str(r.dims()) + " does not match skip " +
                         dims_str(in.dims()));
      }
      in = concat({in, r}, 0);
      trace_op(trace, scope, "concat.recurrent");
    }
    Tensor y = relu(conv2d(in, w.conv_a));
    trace_op(trace, scope, "decoder.conv2d");
    if (attention) {
      y = attention_inject(y, (*attention)[i], cfg.upsample_mode);
      trace_op(trace, scope, "attention.inject");
    }
    x[i] = relu(conv2d(y, w.conv_b));
    trace_op(trace, scope, "decoder.conv2d");
  }

  DecoderStageOutput out;
  out.pre_tm = TemporalBlock<float>::from_frames(x[0], x[1], x[2]);
  out.st = cfg.temporal_enabled
               ? temporal_module_forward(out.pre_tm, w.tm, cfg.temporal_options(), trace, scope)
               : out.pre_tm;

  std::array<Tensor, 3> rec;
  for (int i = 0; i < 3; ++i) {
    const Tensor st_i = out.st.frame(i);
    out.side[i] = sigmoid(conv2d(st_i, w.side));
    trace_op(trace, scope, "side");
    if (emit_recurrent) {
      rec[i] = upsample(add(st_i, x[i]), 2 * st_i.dim(1), 2 * st_i.dim(2), cfg.upsample_mode);
      trace_op(trace, scope, "recurrent");
    }
  }
  if (emit_recurrent) out.recurrent = std::move(rec);
  return out;
}

inline SaliencyResult network_forward(const FrameClip& clip, const NetworkWeights& w,
                                      const NetworkConfig& cfg, OpTrace* trace = nullptr) {
  cfg.validate();
  std::array<FeaturePyramid, 3> pyramids;
  for (int i = 0; i < 3; ++i) {
    pyramids[i] = encoder_forward(clip.frames[i], w.encoder, cfg.input_size, trace);
  }

  std::optional<std::array<Tensor, 3>> attention;
  if (cfg.attention_enabled) {
    if (!w.attention) throw std::invalid_argument("attention enabled but no attention weights");
    std::array<Tensor, 3> a;
    for (int i = 0; i < 3; ++i) {
      a[i] = attention_forward(pyramids[i][kNumStages - 1], *w.attention);
      trace_op(trace, "attention", "attention");
    }
    attention = std::move(a);
  }

  SaliencyResult result;
  std::optional<std::array<Tensor, 3>> recurrent;
  for (int d = kNumStages; d >= 1; --d) {
    const std::array<Tensor, 3> feats{pyramids[0][d - 1], pyramids[1][d - 1], pyramids[2][d - 1]};
    auto out = decoder_stage(feats, recurrent, attention, w.decoder[d - 1], cfg, d > 1, trace,
                             detail::stage_prefix("decoder", d));
    result.maps[d - 1] = std::move(out.side);
    recurrent = std::move(out.recurrent);
  }
  return result;
}

inline SaliencyResult network_forward(const FrameClip& clip, const WeightStore& store,
                                      const NetworkConfig& cfg, OpTrace* trace = nullptr) {
  return network_forward(clip, NetworkWeights::from_store(store, cfg), cfg, trace);
}

}  // namespace stvs
