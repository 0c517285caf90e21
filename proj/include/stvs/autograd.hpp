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

// Minimal reverse-mode tape covering the temporal-module op set.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvs/nn_ops.hpp"
#include "stvs/temporal_module.hpp"
#include "stvs/tensor.hpp"

namespace stvs {

namespace detail {

// Gradients of out = conv(in, packed) + bias where in is [CI,H,W] and the
// kernel is laid out [O, CI, kh, kw].
template <typename T>
void conv_backward(const T* in, std::int64_t n_in, const ConvGeometry& g, const T* packed,
                   std::int64_t out_ch, const T* grad_out, T* grad_in, T* grad_packed,
                   T* grad_bias) {
  const std::int64_t in_plane = g.in_h * g.in_w;
  const std::int64_t out_plane = g.out_h * g.out_w;
  for (std::int64_t o = 0; o < out_ch; ++o) {
    const T* go = grad_out + o * out_plane;
    T sum = 0;
    for (std::int64_t p = 0; p < out_plane; ++p) sum += go[p];
    grad_bias[o] += sum;
    for (std::int64_t ci = 0; ci < n_in; ++ci) {
      const T* src = in + ci * in_plane;
      T* gsrc = grad_in + ci * in_plane;
      const std::int64_t kbase = (o * n_in + ci) * g.kh * g.kw;
      for (std::int64_t ky = 0; ky < g.kh; ++ky) {
        for (std::int64_t kx = 0; kx < g.kw; ++kx) {
          const T wv = packed[kbase + ky * g.kw + kx];
          const std::int64_t off_x = kx * g.dilation - g.padding;
          std::int64_t x_lo = off_x >= 0 ? 0 : (-off_x + g.stride - 1) / g.stride;
          std::int64_t x_hi = g.in_w - off_x <= 0 ? 0 : (g.in_w - off_x - 1) / g.stride + 1;
          x_hi = std::min(x_hi, g.out_w);
          if (x_lo >= x_hi) continue;
          T gw = 0;
          for (std::int64_t y = 0; y < g.out_h; ++y) {
            const std::int64_t sy = y * g.stride + ky * g.dilation - g.padding;
            if (sy < 0 || sy >= g.in_h) continue;
            const T* grow = go + y * g.out_w;
            const T* srow = src + sy * g.in_w + off_x;
            T* gsrow = gsrc + sy * g.in_w + off_x;
            for (std::int64_t x = x_lo; x < x_hi; ++x) {
              gw += grow[x] * srow[x * g.stride];
              gsrow[x * g.stride] += wv * grow[x];
            }
          }
          grad_packed[kbase + ky * g.kw + kx] += gw;
        }
      }
    }
  }
}

}  // namespace detail

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Records a forward computation and replays it backwards. Each node keeps
/// its value and the inputs needed by its adjoint.
template <typename T>
class Tape {
 public:
  using TensorT = BasicTensor<T>;
  struct Var {
    int id = -1;
  };

  Var constant(TensorT v) { return push(Op::Leaf, {}, std::move(v)); }

  Var param(const std::string& name, TensorT v) {
    if (params_.count(name)) throw TapeError("duplicate parameter '" + name + "'");
    auto var = push(Op::Leaf, {}, std::move(v));
    params_[name] = var.id;
    return var;
  }

  const TensorT& value(Var v) const { return node(v).value; }

  /// Gradient of the last backward() seed w.r.t. v (zeros if unreached).
  TensorT grad(Var v) const {
    const auto& n = node(v);
    return n.grad.size() == n.value.size() && has_grad_[v.id] ? n.grad : TensorT(n.value.dims());
  }

  TensorT param_grad(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw TapeError("unknown parameter '" + name + "'");
    return grad(Var{it->second});
  }

  std::map<std::string, TensorT> param_grads() const {
    std::map<std::string, TensorT> out;
    for (const auto& [name, id] : params_) out.emplace(name, grad(Var{id}));
    return out;
  }

  const std::map<std::string, int>& params() const { return params_; }
  std::size_t size() const { return nodes_.size(); }

  // --- ops ---------------------------------------------------------------

  Var conv2d(Var x, Var kernel, Var bias, std::int64_t dilation = 1, std::int64_t stride = 1,
             std::int64_t padding = -1) {
    const auto& k = value(kernel);
    if (padding < 0) padding = (k.dim(2) - 1) / 2 * dilation;
    Conv2dWeights<T> w{k, value(bias), dilation, stride, padding};
    auto out = stvs::conv2d(value(x), w);
    auto v = push(Op::Conv2d, {x.id, kernel.id, bias.id}, std::move(out));
    nodes_[v.id].iparams = {dilation, stride, padding};
    return v;
  }

  /// window: [3, C, H, W]; kernel: [O, C, 3, kh, kw]; result: [O, H, W].
  Var conv3d_window(Var window, Var kernel, Var bias) {
    const auto& win = value(window);
    if (win.rank() != 4 || win.dim(0) != 3) {
      throw ShapeError("tape conv3d_window expects a [3,C,H,W] window");
    }
    Conv3dWeights<T> w{value(kernel), value(bias)};
    w.validate();
    const auto fs = static_cast<std::size_t>(win.dim(1) * win.dim(2) * win.dim(3));
    const T* base = win.data().data();
    auto out = conv3d_window_planes<T>({base, base + fs, base + 2 * fs}, win.dim(1), win.dim(2),
                                       win.dim(3), w, detail::pack_conv3d_kernel(w.kernel));
    return push(Op::Conv3d, {window.id, kernel.id, bias.id}, std::move(out));
  }

  Var shuffle(Var block) {
    return push(Op::Shuffle, {block.id},
                temporal_shuffle(TemporalBlock<T>(value(block))).stacked());
  }

  Var add(Var a, Var b) { return push(Op::Add, {a.id, b.id}, stvs::add(value(a), value(b))); }

  Var relu(Var x) { return push(Op::Relu, {x.id}, stvs::relu(value(x))); }

  Var concat(const std::vector<Var>& parts, std::int64_t axis) {
    std::vector<TensorT> vals;
    std::vector<int> ids;
    for (auto p : parts) {
      vals.push_back(value(p));
      ids.push_back(p.id);
    }
    auto v = push(Op::Concat, ids, stvs::concat(vals, axis));
    nodes_[v.id].iparams = {axis};
    return v;
  }

  Var slice(Var x, std::int64_t axis, std::int64_t start, std::int64_t len) {
    auto v = push(Op::Slice, {x.id}, slice_axis(value(x), axis, start, len));
    nodes_[v.id].iparams = {axis, start, len};
    return v;
  }

  Var reshape(Var x, Dims dims) { return push(Op::Reshape, {x.id}, stvs::reshape(value(x), dims)); }

  Var repeat(Var x, std::int64_t axis, std::int64_t times) {
    auto v = push(Op::Repeat, {x.id}, repeat_axis(value(x), axis, times));
    nodes_[v.id].iparams = {axis, times};
    return v;
  }

  /// sum((a - target)^2) / denom as a [1] tensor (denom defaults to the
  /// element count); target is treated as constant.
  Var mse(Var a, const TensorT& target, double denom = 0.0) {
    const auto& x = value(a);
    if (x.dims() != target.dims()) throw ShapeError("mse: shape mismatch");
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = double(x[i]) - double(target[i]);
      s += d * d;
    }
    if (denom <= 0.0) denom = static_cast<double>(x.size());
    auto v = push(Op::Mse, {a.id}, TensorT({1}, static_cast<T>(s / denom)));
    nodes_[v.id].aux = target;
    nodes_[v.id].fparam = denom;
    return v;
  }

  /// Mean binary cross-entropy with pred clamped to [1e-7, 1 - 1e-7].
  Var bce(Var pred, const TensorT& target);

  // --- backward ----------------------------------------------------------

  void backward(Var out, const TensorT& upstream) {
    const auto& root = node(out);
    if (root.value.dims() != upstream.dims()) throw ShapeError("backward: upstream shape mismatch");
    for (auto& n : nodes_) n.grad = TensorT();
    std::fill(has_grad_.begin(), has_grad_.end(), false);
    accumulate(out.id, upstream);
    for (int id = out.id; id >= 0; --id) {
      if (!has_grad_[id]) continue;
      backprop_node(id);
    }
  }

  void backward(Var out) { backward(out, TensorT(value(out).dims(), T(1))); }

 private:
  enum class Op { Leaf, Conv2d, Conv3d, Shuffle, Add, Relu, Concat, Slice, Reshape, Repeat, Mse, Bce };

  struct Node {
    Op op;
    std::vector<int> inputs;
    TensorT value;
    TensorT grad;
    std::vector<std::int64_t> iparams;
    TensorT aux;
    double fparam = 0.0;
  };

  Var push(Op op, std::vector<int> inputs, TensorT value) {
    nodes_.push_back(Node{op, std::move(inputs), std::move(value), TensorT(), {}, TensorT(), 0.0});
    has_grad_.push_back(false);
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Node& node(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
      throw TapeError("variable " + std::to_string(v.id) + " was not recorded on this tape");
    }
    return nodes_[v.id];
  }

  void accumulate(int id, const TensorT& g) {
    auto& n = nodes_[id];
    if (!has_grad_[id]) {
      n.grad = g;
      has_grad_[id] = true;
      return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
  }

  void backprop_node(int id) {
    Node& n = nodes_[id];
    const TensorT& g = n.grad;
    switch (n.op) {
      case Op::Leaf: return;
      case Op::Add:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        return;
      case Op::Relu: {
        const auto& x = nodes_[n.inputs[0]].value;
        TensorT gx(x.dims());
        for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > T(0) ? g[i] : T(0);
        accumulate(n.inputs[0], gx);
        return;
      }
      case Op::Shuffle:
        accumulate(n.inputs[0], temporal_shuffle_inverse(TemporalBlock<T>(g)).stacked());
        return;
      case Op::Reshape:
        accumulate(n.inputs[0], stvs::reshape(g, nodes_[n.inputs[0]].value.dims()));
        return;
      case Op::Concat: {
        std::int64_t start = 0;
        for (int in : n.inputs) {
          const auto len = nodes_[in].value.dim(n.iparams[0]);
          accumulate(in, slice_axis(g, n.iparams[0], start, len));
          start += len;
        }
        return;
      }
      case Op::Slice: {
        const auto& x = nodes_[n.inputs[0]].value;
        const auto axis = n.iparams[0], start = n.iparams[1], len = n.iparams[2];
        TensorT gx(x.dims());
        auto [outer, na, inner] = detail::split_at(x.dims(), axis);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t k = 0; k < static_cast<std::size_t>(len) * inner; ++k)
            gx[(o * na + static_cast<std::size_t>(start)) * inner + k] = g[o * len * inner + k];
        accumulate(n.inputs[0], gx);
        return;
      }
      case Op::Repeat: {
        const auto& x = nodes_[n.inputs[0]].value;
        const auto axis = n.iparams[0], times = n.iparams[1];
        TensorT gx(x.dims());
        auto [outer, na, inner] = detail::split_at(x.dims(), axis);
        const std::size_t block = na * inner;
        for (std::size_t o = 0; o < outer; ++o)
          for (std::int64_t r = 0; r < times; ++r)
            for (std::size_t k = 0; k < block; ++k)
              gx[o * block + k] += g[(o * times + r) * block + k];
        accumulate(n.inputs[0], gx);
        return;
      }
      case Op::Conv2d: {
        const auto& x = nodes_[n.inputs[0]].value;
        const auto& k = nodes_[n.inputs[1]].value;
        ConvGeometry geo{x.dim(1), x.dim(2), n.value.dim(1), n.value.dim(2), k.dim(2), k.dim(3),
                         n.iparams[0], n.iparams[1], n.iparams[2]};
        TensorT gx(x.dims()), gk(k.dims()), gb({k.dim(0)});
        detail::conv_backward(x.data().data(), x.dim(0), geo, k.data().data(), k.dim(0),
                              g.data().data(), gx.data().data(), gk.data().data(),
                              gb.data().data());
        accumulate(n.inputs[0], gx);
        accumulate(n.inputs[1], gk);
        accumulate(n.inputs[2], gb);
        return;
      }
      case Op::Conv3d: {
        const auto& win = nodes_[n.inputs[0]].value;
        const auto& k = nodes_[n.inputs[1]].value;
        const auto O = k.dim(0), C = k.dim(1), KH = k.dim(3), KW = k.dim(4);
        const auto packed = detail::pack_conv3d_kernel(k);
        ConvGeometry geo{win.dim(2), win.dim(3), win.dim(2), win.dim(3), KH, KW, 1, 1, (KH - 1) / 2};
        TensorT gwin(win.dims()), gb({O});
        std::vector<T> gpacked(packed.size(), T(0));
        detail::conv_backward(win.data().data(), 3 * C, geo, packed.data(), O, g.data().data(),
                              gwin.data().data(), gpacked.data(), gb.data().data());
        TensorT gk(k.dims());
        const auto taps = KH * KW;
        for (std::int64_t o = 0; o < O; ++o)
          for (std::int64_t t = 0; t < 3; ++t)
            for (std::int64_t c = 0; c < C; ++c)
              std::copy_n(gpacked.data() + ((o * 3 + t) * C + c) * taps, taps,
                          gk.data().data() + ((o * C + c) * 3 + t) * taps);
        accumulate(n.inputs[0], gwin);
        accumulate(n.inputs[1], gk);
        accumulate(n.inputs[2], gb);
        return;
      }
      case Op::Mse: {
        const auto& x = nodes_[n.inputs[0]].value;
        TensorT gx(x.dims());
        const T scale = static_cast<T>(double(g[0]) * 2.0 / n.fparam);
        for (std::size_t i = 0; i < x.size(); ++i) gx[i] = scale * (x[i] - n.aux[i]);
        accumulate(n.inputs[0], gx);
        return;
      }
      case Op::Bce: {
        const auto& p = nodes_[n.inputs[0]].value;
        TensorT gx = bce_grad(p, n.aux);
        for (auto& v : gx.data()) v *= g[0];
        accumulate(n.inputs[0], gx);
        return;
      }
    }
  }

 public:
  static constexpr double kBceClamp = 1e-7;

  struct BceResult {
    double loss;
    TensorT grad;
  };

  static TensorT bce_grad(const TensorT& pred, const TensorT& target) {
    TensorT gx(pred.dims());
    const double n = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double p = double(pred[i]);
      if (p < kBceClamp || p > 1.0 - kBceClamp) continue;  // clamp is flat there
      gx[i] = static_cast<T>((p - double(target[i])) / (p * (1.0 - p)) / n);
    }
    return gx;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<bool> has_grad_;
  std::map<std::string, int> params_;
};

/// Mean binary cross-entropy with its analytic gradient w.r.t. pred.
template <typename T>
typename Tape<T>::BceResult bce_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  if (pred.dims() != target.dims()) {
    throw ShapeError("bce_loss: " + dims_str(pred.dims()) + " vs " + dims_str(target.dims()));
  }
  constexpr double eps = Tape<T>::kBceClamp;
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(double(pred[i]), eps, 1.0 - eps);
    const double t = double(target[i]);
    s -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return {s / static_cast<double>(pred.size()), Tape<T>::bce_grad(pred, target)};
}

template <typename T>
typename Tape<T>::Var Tape<T>::bce(Var pred, const TensorT& target) {
  auto r = bce_loss(value(pred), target);
  auto v = push(Op::Bce, {pred.id}, TensorT({1}, static_cast<T>(r.loss)));
  nodes_[v.id].aux = target;
  return v;
}

// ---------------------------------------------------------------------------
// Temporal module on the tape

/// Parameter names used by tape_temporal_module: conv3d_{l}.{kernel,bias}
/// and res2d_{l}.{kernel,bias} for l = 1..L.
template <typename T>
std::map<std::string, typename Tape<T>::Var> tape_params(Tape<T>& tape,
                                                         const TemporalModuleWeights<T>& w) {
  std::map<std::string, typename Tape<T>::Var> p;
  for (std::size_t l = 0; l < w.conv3d.size(); ++l) {
    const auto s = std::to_string(l + 1);
    p["conv3d_" + s + ".kernel"] = tape.param("conv3d_" + s + ".kernel", w.conv3d[l].kernel);
    p["conv3d_" + s + ".bias"] = tape.param("conv3d_" + s + ".bias", w.conv3d[l].bias);
    p["res2d_" + s + ".kernel"] = tape.param("res2d_" + s + ".kernel", w.res2d[l].kernel);
    p["res2d_" + s + ".bias"] = tape.param("res2d_" + s + ".bias", w.res2d[l].bias);
  }
  return p;
}

/// One sequential 3D conv layer expressed with tape ops. Cyclic windows are
/// slices of the 3x repeated block; other schemes concat a 5-frame sequence.
template <typename T>
typename Tape<T>::Var tape_tm_conv3d_layer(Tape<T>& tape, typename Tape<T>::Var block,
                                           typename Tape<T>::Var kernel,
                                           typename Tape<T>::Var bias, PaddingPolicy policy,
                                           int layer_index) {
  using Var = typename Tape<T>::Var;
  const Dims b = tape.value(block).dims();
  const auto C = b[1], H = b[2], W = b[3];
  Var seq;
  std::array<std::int64_t, 3> offsets{};
  const auto scheme = pad_scheme(policy, layer_index);
  if (scheme == PadScheme::Cyclic) {
    seq = tape.repeat(block, 0, 3);
    offsets = kRepeatWindowOffsets;
  } else {
    Var lo = scheme == PadScheme::Zero ? tape.constant(BasicTensor<T>({1, C, H, W}))
                                       : tape.slice(block, 0, 0, 1);
    Var hi = scheme == PadScheme::Zero ? tape.constant(BasicTensor<T>({1, C, H, W}))
                                       : tape.slice(block, 0, 2, 1);
    seq = tape.concat({lo, block, hi}, 0);
    offsets = kPaddedWindowOffsets;
  }
  std::vector<Var> outs;
  for (int i = 0; i < 3; ++i) {
    auto y = tape.conv3d_window(tape.slice(seq, 0, offsets[i], 3), kernel, bias);
    const Dims yd = tape.value(y).dims();
    outs.push_back(tape.reshape(y, {1, yd[0], yd[1], yd[2]}));
  }
  return tape.concat(outs, 0);
}

template <typename T>
typename Tape<T>::Var tape_temporal_module(
    Tape<T>& tape, typename Tape<T>::Var block,
    const std::map<std::string, typename Tape<T>::Var>& p, const TemporalOptions& opts) {
  using Var = typename Tape<T>::Var;
  Var x = block;
  const int L = opts.num_conv_layers;
  for (int l = 0; l < L; ++l) {
    const auto s = std::to_string(l + 1);
    Var st = tape_tm_conv3d_layer(tape, x, p.at("conv3d_" + s + ".kernel"),
                                  p.at("conv3d_" + s + ".bias"), opts.policy, l + 1);
    const bool last = l == L - 1;
    if (!last || opts.residual_on_last) {
      const Dims xd = tape.value(x).dims();
      std::vector<Var> res;
      for (int i = 0; i < 3; ++i) {
        auto fi = tape.reshape(tape.slice(x, 0, i, 1), {xd[1], xd[2], xd[3]});
        auto ci = tape.conv2d(fi, p.at("res2d_" + s + ".kernel"), p.at("res2d_" + s + ".bias"));
        const Dims cd = tape.value(ci).dims();
        res.push_back(tape.reshape(ci, {1, cd[0], cd[1], cd[2]}));
      }
      st = tape.add(st, tape.concat(res, 0));
    }
    if (opts.shuffle_enabled && !last) st = tape.shuffle(st);
    x = st;
  }
  return x;
}

}  // namespace stvs
