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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvs/autograd.hpp"
#include "stvs/rng.hpp"
#include "stvs/temporal_module.hpp"
#include "stvs/weight_store.hpp"

namespace stvs {

template <typename T>
using ParamMap = std::map<std::string, BasicTensor<T>>;

/// Classical momentum SGD with weight decay folded into the gradient:
///   v <- m*v + g + wd*p ;  p <- p - lr*v
template <typename T>
struct SgdState {
  double learning_rate = 5e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  ParamMap<T> velocity;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must be in [0,1)");
  }
};

template <typename T>
void sgd_step(SgdState<T>& state, ParamMap<T>& params, const ParamMap<T>& grads) {
  state.validate();
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: param/grad count mismatch");
  const T lr = static_cast<T>(state.learning_rate);
  const T m = static_cast<T>(state.momentum);
  const T wd = static_cast<T>(state.weight_decay);
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) throw std::invalid_argument("sgd_step: no gradient for '" + name + "'");
    const auto& g = git->second;
    if (g.dims() != p.dims()) throw ShapeError("sgd_step: gradient shape mismatch for '" + name + "'");
    auto [vit, inserted] = state.velocity.try_emplace(name, BasicTensor<T>(p.dims()));
    auto& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = m * v[i] + g[i] + wd * p[i];
      p[i] -= lr * v[i];
    }
  }
}

inline WeightStore sgd_step(SgdState<float>& state, const WeightStore& params,
                            const ParamMap<float>& grads) {
  ParamMap<float> p(params.begin(), params.end());
  sgd_step(state, p, grads);
  WeightStore out;
  for (auto& [name, t] : p) out.insert(name, std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checks

struct GradCheckReport {
  std::string op;
  std::uint64_t seed = 0;
  std::size_t coords = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  bool pass = false;
};

struct GradCheckTolerance {
  double step = 1e-4;
  double rel = 1e-3;
  double abs = 1e-6;
};

inline const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> ops{"conv2d", "conv3d_window", "shuffle", "add", "relu",
                                            "concat", "slice", "repeat", "bce", "temporal_module"};
  return ops;
}

namespace detail {

using Tape64 = Tape<double>;
using Var64 = Tape64::Var;

// Leaves are perturbed by name; `build` records the op and returns the
// output whose weighted sum with `upstream` is the scalar objective.
struct GradCheckCase {
  std::map<std::string, Tensor64> leaves;
  std::function<Var64(Tape64&, const std::map<std::string, Var64>&)> build;
  bool exact = false;  // piecewise-linear permutation: dyadic data, exact FD
};

inline Tensor64 dyadic_uniform(Dims dims, Xoshiro256& rng) {
  Tensor64 t(std::move(dims));
  for (auto& v : t.data()) v = static_cast<double>(rng.uniform_int(-128, 128)) / 64.0;
  return t;
}

inline GradCheckCase make_gradcheck_case(const std::string& op, Xoshiro256& rng) {
  GradCheckCase c;
  auto u = [&](Dims d) { return random_uniform<double>(std::move(d), rng); };
  if (op == "conv2d") {
    c.leaves = {{"x", u({2, 5, 5})}, {"k", u({3, 2, 3, 3})}, {"b", u({3})}};
    c.build = [](Tape64& t, const auto& v) { return t.conv2d(v.at("x"), v.at("k"), v.at("b")); };
  } else if (op == "conv3d_window") {
    c.leaves = {{"w", u({3, 2, 4, 4})}, {"k", u({2, 2, 3, 3, 3})}, {"b", u({2})}};
    c.build = [](Tape64& t, const auto& v) {
      return t.conv3d_window(v.at("w"), v.at("k"), v.at("b"));
    };
  } else if (op == "shuffle") {
    c.exact = true;
    c.leaves = {{"x", dyadic_uniform({3, 4, 3, 3}, rng)}};
    c.build = [](Tape64& t, const auto& v) { return t.shuffle(v.at("x")); };
  } else if (op == "add") {
    c.leaves = {{"a", u({3, 2, 4, 4})}, {"b", u({3, 2, 4, 4})}};
    c.build = [](Tape64& t, const auto& v) { return t.add(v.at("a"), v.at("b")); };
  } else if (op == "relu") {
    // Keep every input at least 0.1 away from the kink.
    Tensor64 x({2, 4, 4});
    for (auto& e : x.data()) {
      const double m = rng.uniform(0.1, 1.0);
      e = rng.uniform() < 0.5 ? -m : m;
    }
    c.leaves = {{"x", x}};
    c.build = [](Tape64& t, const auto& v) { return t.relu(v.at("x")); };
  } else if (op == "concat") {
    c.leaves = {{"a", u({2, 3, 3})}, {"b", u({1, 3, 3})}, {"c", u({3, 3, 3})}};
    c.build = [](Tape64& t, const auto& v) {
      return t.concat({v.at("a"), v.at("b"), v.at("c")}, 0);
    };
  } else if (op == "slice") {
    c.leaves = {{"x", u({3, 5, 4})}};
    c.build = [](Tape64& t, const auto& v) { return t.slice(v.at("x"), 1, 1, 3); };
  } else if (op == "repeat") {
    c.leaves = {{"x", u({3, 2, 2, 2})}};
    c.build = [](Tape64& t, const auto& v) { return t.repeat(v.at("x"), 0, 3); };
  } else if (op == "bce") {
    Tensor64 p({4, 4}), target({4, 4});
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.uniform(0.05, 0.95);
      target[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    c.leaves = {{"p", p}};
    c.build = [target](Tape64& t, const auto& v) { return t.bce(v.at("p"), target); };
  } else if (op == "temporal_module") {
    const std::int64_t C = 2;
    c.leaves["x"] = u({3, C, 4, 4});
    for (int l = 1; l <= 3; ++l) {
      const auto s = std::to_string(l);
      c.leaves["conv3d_" + s + ".kernel"] = scale(u({C, C, 3, 3, 3}), 0.3);
      c.leaves["conv3d_" + s + ".bias"] = u({C});
      c.leaves["res2d_" + s + ".kernel"] = scale(u({C, C, 3, 3}), 0.3);
      c.leaves["res2d_" + s + ".bias"] = u({C});
    }
    c.build = [](Tape64& t, const auto& v) {
      std::map<std::string, Var64> p(v.begin(), v.end());
      p.erase("x");
      return tape_temporal_module(t, v.at("x"), p, TemporalOptions{});
    };
  } else {
    throw std::invalid_argument("gradcheck: unsupported op '" + op + "'");
  }
  return c;
}

inline double weighted_sum(const Tensor64& y, const Tensor64& w) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

}  // namespace detail

/// Compares the tape's analytic gradient against central differences for
/// every coordinate of every leaf (inputs and parameters) of a small random
/// instance of `op`, in double precision.
///
/// A coordinate passes when its relative error is within tol.rel or its
/// absolute error within tol.abs. For the pure permutation op the data and
/// step are dyadic (multiples of 1/64, step 2^-13) so the differences are
/// exact and any nonzero error is a real bug.
inline GradCheckReport fd_gradcheck(const std::string& op, std::uint64_t seed,
                                    GradCheckTolerance tol = {}) {
  Xoshiro256 rng(seed);
  auto c = detail::make_gradcheck_case(op, rng);
  const double h = c.exact ? std::ldexp(1.0, -13) : tol.step;

  auto run = [&](const std::map<std::string, Tensor64>& leaves, detail::Tape64& tape,
                 std::map<std::string, detail::Var64>& vars) {
    for (const auto& [name, t] : leaves) vars[name] = tape.param(name, t);
    return c.build(tape, vars);
  };

  detail::Tape64 tape;
  std::map<std::string, detail::Var64> vars;
  auto out = run(c.leaves, tape, vars);
  const auto& out_dims = tape.value(out).dims();
  Tensor64 upstream = c.exact ? detail::dyadic_uniform(out_dims, rng)
                              : random_uniform<double>(out_dims, rng);
  if (op == "bce") upstream = Tensor64(out_dims, 1.0);
  tape.backward(out, upstream);

  auto objective = [&](const std::map<std::string, Tensor64>& leaves) {
    detail::Tape64 t;
    std::map<std::string, detail::Var64> v;
    auto y = run(leaves, t, v);
    return detail::weighted_sum(t.value(y), upstream);
  };

  GradCheckReport rep{op, seed, 0, 0.0, 0.0, true};
  auto leaves = c.leaves;
  for (auto& [name, t] : leaves) {
    const auto analytic = tape.param_grad(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + h;
      const double fp = objective(leaves);
      t[i] = orig - h;
      const double fm = objective(leaves);
      t[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[i];
      const double abs_err = std::abs(a - numeric);
      const double scale_ = std::max(std::abs(a), std::abs(numeric));
      const double rel_err = scale_ > 0.0 ? abs_err / scale_ : 0.0;
      rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
      rep.max_rel_err = std::max(rep.max_rel_err, rel_err);
      if (!(rel_err <= tol.rel || abs_err <= tol.abs)) rep.pass = false;
      ++rep.coords;
    }
  }
  if (c.exact && rep.max_abs_err != 0.0) rep.pass = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Teacher-student overfit of a single temporal module

struct OverfitOptions {
  std::int64_t channels = 8;
  std::int64_t size = 16;
  int batch = 4;
  TemporalOptions tm{};
  double learning_rate = 5e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

struct OverfitResult {
  std::vector<double> losses;  // loss before each update
  bool diverged = false;
};

template <typename T>
TemporalModuleWeights<T> random_tm_weights(std::int64_t C, int layers, Xoshiro256& rng) {
  TemporalModuleWeights<T> w;
  const double b3 = std::sqrt(1.5 / double(C * 27));
  const double b2 = std::sqrt(1.5 / double(C * 9));
  for (int l = 0; l < layers; ++l) {
    w.conv3d.push_back({random_uniform<T>({C, C, 3, 3, 3}, rng, -b3, b3),
                        random_uniform<T>({C}, rng, -0.1, 0.1)});
    w.res2d.push_back(Conv2dWeights<T>::same(random_uniform<T>({C, C, 3, 3}, rng, -b2, b2),
                                             random_uniform<T>({C}, rng, -0.1, 0.1)));
  }
  return w;
}

/// Trains a student temporal module (float32) to reproduce a frozen random
/// teacher's outputs on a fixed batch of random blocks, minimizing MSE with
/// momentum SGD. Draw order from xoshiro256**(seed): teacher weights,
/// student weights, then the input blocks.
inline OverfitResult tm_overfit_demo(std::uint64_t seed, int steps, const OverfitOptions& o = {}) {
  OverfitResult result;
  if (steps <= 0) return result;
  Xoshiro256 rng(seed);
  const int L = o.tm.num_conv_layers;
  const auto teacher = random_tm_weights<float>(o.channels, L, rng);
  const auto student = random_tm_weights<float>(o.channels, L, rng);

  std::vector<TemporalBlock<float>> inputs;
  std::vector<Tensor> targets;
  for (int b = 0; b < o.batch; ++b) {
    inputs.emplace_back(random_uniform<float>({3, o.channels, o.size, o.size}, rng));
    targets.push_back(temporal_module_forward(inputs.back(), teacher, o.tm).stacked());
  }

  ParamMap<float> params;
  {
    Tape<float> t;
    tape_params(t, student);
    for (const auto& [name, id] : t.params()) params.emplace(name, t.value(Tape<float>::Var{id}));
  }
  SgdState<float> sgd{o.learning_rate, o.momentum, o.weight_decay, {}};

  for (int step = 0; step < steps; ++step) {
    ParamMap<float> grads;
    double loss = 0.0;
    for (int b = 0; b < o.batch; ++b) {
      Tape<float> tape;
      std::map<std::string, Tape<float>::Var> vars;
      for (const auto& [name, p] : params) vars[name] = tape.param(name, p);
      auto x = tape.constant(inputs[b].stacked());
      auto y = tape_temporal_module(tape, x, vars, o.tm);
      auto l = tape.mse(y, targets[b], static_cast<double>(o.size * o.size));
      tape.backward(l, Tensor({1}, 1.0f / static_cast<float>(o.batch)));
      loss += double(tape.value(l)[0]) / o.batch;
      for (const auto& [name, v] : vars) {
        auto g = tape.grad(v);
        auto [it, inserted] = grads.try_emplace(name, g);
        if (!inserted) {
          for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
        }
      }
    }
    result.losses.push_back(loss);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    sgd_step(sgd, params, grads);
  }
  return result;
}

}  // namespace stvs
