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
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace stvs {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AxisError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

using Dims = std::vector<std::int64_t>;

inline std::string dims_str(const Dims& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ',';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

inline std::int64_t dims_product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::int64_t{1},
                         std::multiplies<>());
}

/// Dense row-major tensor (last axis fastest). Rank >= 1, every axis >= 1.
///
/// Results of every operation below are freshly materialized; nothing
/// aliases across calls, so a `BasicTensor` can be treated as an immutable
/// value once built.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() : dims_{1}, data_(1, T(0)) {}

  explicit BasicTensor(Dims dims, T fill = T(0)) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(static_cast<std::size_t>(dims_product(dims_)), fill);
  }

  BasicTensor(Dims dims, std::vector<T> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (static_cast<std::int64_t>(data_.size()) != dims_product(dims_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + dims_str(dims_));
    }
  }

  static BasicTensor zeros(Dims dims) { return BasicTensor(std::move(dims)); }
  static BasicTensor full(Dims dims, T v) { return BasicTensor(std::move(dims), v); }

  const Dims& dims() const noexcept { return dims_; }
  std::int64_t dim(std::int64_t axis) const { return dims_.at(normalize_axis(axis)); }
  std::int64_t rank() const noexcept { return static_cast<std::int64_t>(dims_.size()); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }
  std::vector<T> release() && noexcept { return std::move(data_); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::initializer_list<std::int64_t> idx) { return data_[offset(idx)]; }
  const T& at(std::initializer_list<std::int64_t> idx) const { return data_[offset(idx)]; }

  std::size_t offset(std::initializer_list<std::int64_t> idx) const {
    if (static_cast<std::int64_t>(idx.size()) != rank()) {
      throw AxisError("index rank mismatch for tensor " + dims_str(dims_));
    }
    std::size_t off = 0;
    std::size_t a = 0;
    for (auto i : idx) {
      if (i < 0 || i >= dims_[a]) throw AxisError("index out of range");
      off = off * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(i);
      ++a;
    }
    return off;
  }

  std::int64_t normalize_axis(std::int64_t axis) const {
    if (axis < 0 || axis >= rank()) {
      throw AxisError("axis " + std::to_string(axis) + " invalid for rank " +
                      std::to_string(rank()));
    }
    return axis;
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(),
                   [](T v) { return static_cast<U>(v); });
    return BasicTensor<U>(dims_, std::move(out));
  }

  bool operator==(const BasicTensor& o) const {
    return dims_ == o.dims_ && data_ == o.data_;
  }

 private:
  static void check_dims(const Dims& dims) {
    if (dims.empty()) throw ShapeError("tensor rank must be >= 1");
    for (auto d : dims) {
      if (d < 1) throw ShapeError("tensor dims must be >= 1, got " + dims_str(dims));
    }
  }

  Dims dims_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Bitwise equality, distinguishing -0.0/0.0 and matching NaN payloads.
template <typename T>
bool bit_equal(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return a.dims() == b.dims() &&
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(T)) == 0;
}

/// max|a-b| / max(max|b|, floor). Norm-relative so near-zero entries
/// produced by cancellation do not dominate.
template <typename T>
double max_rel_err(const BasicTensor<T>& a, const BasicTensor<T>& b,
                   double floor = 1e-30) {
  if (a.dims() != b.dims()) {
    throw ShapeError("max_rel_err: " + dims_str(a.dims()) + " vs " + dims_str(b.dims()));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(double(a[i]) - double(b[i])));
    den = std::max(den, std::abs(double(b[i])));
  }
  return num / std::max(den, floor);
}

template <typename T>
double max_abs_err(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.dims() != b.dims()) throw ShapeError("max_abs_err: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  }
  return m;
}

namespace detail {

// Builds tensor storage front to back without zero-filling it first.
template <typename T>
class Appender {
 public:
  explicit Appender(std::size_t capacity) { v_.reserve(capacity); }
  void append(const T* src, std::size_t n) { v_.insert(v_.end(), src, src + n); }
  void append_zeros(std::size_t n) { v_.insert(v_.end(), n, T(0)); }
  BasicTensor<T> finish(Dims dims) && { return BasicTensor<T>(std::move(dims), std::move(v_)); }

 private:
  std::vector<T> v_;
};

// Splits dims around `axis` into (outer, axis, inner) extents.
inline std::tuple<std::size_t, std::size_t, std::size_t> split_at(const Dims& dims,
                                                                  std::int64_t axis) {
  std::size_t outer = 1, inner = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(dims[i]);
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < dims.size(); ++i) {
    inner *= static_cast<std::size_t>(dims[i]);
  }
  return {outer, static_cast<std::size_t>(dims[axis]), inner};
}

}  // namespace detail

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& t, Dims new_dims) {
  for (auto d : new_dims) {
    if (d < 1) throw ShapeError("reshape: dims must be >= 1");
  }
  if (new_dims.empty() || dims_product(new_dims) != dims_product(t.dims())) {
    throw ShapeError("reshape: cannot view " + dims_str(t.dims()) + " as " +
                     dims_str(new_dims));
  }
  return BasicTensor<T>(std::move(new_dims), t.vec());
}

template <typename T>
BasicTensor<T> reshape(BasicTensor<T>&& t, Dims new_dims) {
  for (auto d : new_dims) {
    if (d < 1) throw ShapeError("reshape: dims must be >= 1");
  }
  if (new_dims.empty() || dims_product(new_dims) != dims_product(t.dims())) {
    throw ShapeError("reshape: cannot view " + dims_str(t.dims()) + " as " +
                     dims_str(new_dims));
  }
  return BasicTensor<T>(std::move(new_dims), std::move(t).release());
}

template <typename T>
BasicTensor<T> flatten(const BasicTensor<T>& t) {
  return reshape(t, Dims{static_cast<std::int64_t>(t.size())});
}

template <typename T>
BasicTensor<T> transpose2(const BasicTensor<T>& t, std::int64_t axis_a, std::int64_t axis_b) {
  axis_a = t.normalize_axis(axis_a);
  axis_b = t.normalize_axis(axis_b);
  if (axis_a == axis_b) throw AxisError("transpose2: axes must differ");
  if (axis_a > axis_b) std::swap(axis_a, axis_b);

  const Dims& in = t.dims();
  Dims out_dims = in;
  std::swap(out_dims[axis_a], out_dims[axis_b]);

  // View as [outer, A, mid, B, inner] and write [outer, B, mid, A, inner].
  std::size_t outer = 1, mid = 1, inner = 1;
  for (std::int64_t i = 0; i < axis_a; ++i) outer *= in[i];
  for (std::int64_t i = axis_a + 1; i < axis_b; ++i) mid *= in[i];
  for (std::int64_t i = axis_b + 1; i < t.rank(); ++i) inner *= in[i];
  const auto na = static_cast<std::size_t>(in[axis_a]);
  const auto nb = static_cast<std::size_t>(in[axis_b]);

  // Destination order, so the output is written front to back.
  detail::Appender<T> out(t.size());
  const T* src = t.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t m = 0; m < mid; ++m)
        for (std::size_t a = 0; a < na; ++a)
          out.append(src + (((o * na + a) * mid + m) * nb + b) * inner, inner);
  return std::move(out).finish(std::move(out_dims));
}

/// Tiles the whole tensor `times` times along `axis`: block b of the result
/// equals the input for every b.
template <typename T>
BasicTensor<T> repeat_axis(const BasicTensor<T>& t, std::int64_t axis, std::int64_t times) {
  axis = t.normalize_axis(axis);
  if (times < 1) throw ShapeError("repeat_axis: times must be >= 1");
  auto [outer, n, inner] = detail::split_at(t.dims(), axis);
  Dims out_dims = t.dims();
  out_dims[axis] *= times;
  const std::size_t block = n * inner;
  detail::Appender<T> out(t.size() * static_cast<std::size_t>(times));
  const T* src = t.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::int64_t r = 0; r < times; ++r) out.append(src + o * block, block);
  return std::move(out).finish(std::move(out_dims));
}

template <typename T>
BasicTensor<T> concat(std::span<const BasicTensor<T>> parts, std::int64_t axis) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  const auto& first = parts.front();
  axis = first.normalize_axis(axis);
  Dims out_dims = first.dims();
  out_dims[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != first.rank()) throw ShapeError("concat: rank mismatch");
    for (std::int64_t a = 0; a < first.rank(); ++a) {
      if (a != axis && p.dims()[a] != first.dims()[a]) {
        throw ShapeError("concat: " + dims_str(p.dims()) + " disagrees with " +
                         dims_str(first.dims()) + " off axis " + std::to_string(axis));
      }
    }
    out_dims[axis] += p.dims()[axis];
  }
  auto [outer, total, inner] = detail::split_at(out_dims, axis);
  detail::Appender<T> out(outer * total * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (const auto& p : parts) {
      const std::size_t block = static_cast<std::size_t>(p.dims()[axis]) * inner;
      out.append(p.data().data() + o * block, block);
    }
  }
  return std::move(out).finish(std::move(out_dims));
}

template <typename T>
BasicTensor<T> concat(std::initializer_list<BasicTensor<T>> parts, std::int64_t axis) {
  return concat(std::span<const BasicTensor<T>>(parts.begin(), parts.size()), axis);
}

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, std::int64_t axis) {
  return concat(std::span<const BasicTensor<T>>(parts), axis);
}

template <typename T>
BasicTensor<T> slice_axis(const BasicTensor<T>& t, std::int64_t axis, std::int64_t start,
                          std::int64_t len) {
  axis = t.normalize_axis(axis);
  if (start < 0 || len < 1 || start + len > t.dims()[axis]) {
    throw ShapeError("slice_axis: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") outside axis of size " +
                     std::to_string(t.dims()[axis]));
  }
  auto [outer, n, inner] = detail::split_at(t.dims(), axis);
  Dims out_dims = t.dims();
  out_dims[axis] = len;
  const std::size_t block = static_cast<std::size_t>(len) * inner;
  detail::Appender<T> out(outer * block);
  for (std::size_t o = 0; o < outer; ++o) {
    out.append(t.data().data() + (o * n + static_cast<std::size_t>(start)) * inner, block);
  }
  return std::move(out).finish(std::move(out_dims));
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("add: " + dims_str(a.dims()) + " vs " + dims_str(b.dims()));
  }
  BasicTensor<T> out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T, typename F>
BasicTensor<T> map(const BasicTensor<T>& t, F&& f) {
  BasicTensor<T> out(t.dims());
  std::transform(t.data().begin(), t.data().end(), out.data().begin(), f);
  return out;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& t) {
  return map(t, [](T v) { return v > T(0) ? v : T(0); });
}

template <typename T>
T sigmoid_scalar(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& t) {
  return map(t, [](T v) { return sigmoid_scalar(v); });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& t, T s) {
  return map(t, [s](T v) { return v * s; });
}

template <typename T>
bool all_finite(const BasicTensor<T>& t) {
  return std::all_of(t.data().begin(), t.data().end(),
                     [](T v) { return std::isfinite(v); });
}

}  // namespace stvs
