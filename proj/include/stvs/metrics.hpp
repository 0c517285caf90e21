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

// Salient object detection metrics: MAE, max F-measure, S-measure.
//
// Maps are [H,W] or [1,H,W] tensors. Predictions are in [0,1]; ground truth
// is binarized at 0.5.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "stvs/tensor.hpp"

namespace stvs::metrics {

inline constexpr double kBetaSq = 0.3;
inline constexpr int kThresholds = 256;
inline constexpr double kAlpha = 0.5;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

namespace detail {

struct Map2d {
  std::int64_t h, w;
  std::vector<double> v;
  double at(std::int64_t y, std::int64_t x) const { return v[y * w + x]; }
};

template <typename T>
Map2d as_map(const BasicTensor<T>& t, const char* what) {
  std::int64_t h, w;
  if (t.rank() == 2) {
    h = t.dim(0);
    w = t.dim(1);
  } else if (t.rank() == 3 && t.dim(0) == 1) {
    h = t.dim(1);
    w = t.dim(2);
  } else {
    throw ShapeError(std::string(what) + " must be [H,W] or [1,H,W], got " + dims_str(t.dims()));
  }
  Map2d m{h, w, std::vector<double>(t.size())};
  std::transform(t.data().begin(), t.data().end(), m.v.begin(), [](T x) { return double(x); });
  return m;
}

template <typename T>
std::pair<Map2d, Map2d> pair_of(const BasicTensor<T>& pred, const BasicTensor<T>& gt) {
  auto p = as_map(pred, "prediction");
  auto g = as_map(gt, "ground truth");
  if (p.h != g.h || p.w != g.w) {
    throw ShapeError("prediction " + dims_str(pred.dims()) + " and ground truth " +
                     dims_str(gt.dims()) + " differ in size");
  }
  for (auto& x : g.v) x = x > 0.5 ? 1.0 : 0.0;
  return {std::move(p), std::move(g)};
}

inline void check_range(const Map2d& p) {
  for (double x : p.v) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("prediction values must lie in [0,1]");
  }
}

}  // namespace detail

/// mean |pred - gt|.
template <typename T>
double mae(const BasicTensor<T>& pred, const BasicTensor<T>& gt) {
  auto [p, g] = detail::pair_of(pred, gt);
  detail::check_range(p);
  double s = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) s += std::abs(p.v[i] - g.v[i]);
  return s / static_cast<double>(p.v.size());
}

/// Level of a prediction value on the 256-step threshold grid.
inline int quantize_level(double v) {
  return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// Max over thresholds k = 0..255 of the F-measure of {level(pred) >= k}
/// against gt, beta^2 = 0.3. A threshold with no predicted positives, no gt
/// positives or P + R = 0 scores 0.
template <typename T>
double f_max(const BasicTensor<T>& pred, const BasicTensor<T>& gt) {
  auto [p, g] = detail::pair_of(pred, gt);
  // Histogram per level so all thresholds cost one pass.
  std::array<double, kThresholds> pos_hist{}, all_hist{};
  double gt_pos = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    const int lv = quantize_level(p.v[i]);
    all_hist[lv] += 1;
    pos_hist[lv] += g.v[i];
    gt_pos += g.v[i];
  }
  if (gt_pos == 0) return 0.0;
  double best = 0.0, tp = 0.0, predicted = 0.0;
  for (int k = kThresholds - 1; k >= 0; --k) {
    tp += pos_hist[k];
    predicted += all_hist[k];
    if (predicted == 0 || tp == 0) continue;
    const double prec = tp / predicted, rec = tp / gt_pos;
    best = std::max(best, (1.0 + kBetaSq) * prec * rec / (kBetaSq * prec + rec));
  }
  return best;
}

namespace detail {

inline double object_score(const std::vector<double>& vals) {
  if (vals.empty()) return 0.0;
  const double n = static_cast<double>(vals.size());
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= n;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double sd = vals.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return 2.0 * mean / (mean * mean + 1.0 + sd + kEps);
}

inline double s_object(const Map2d& p, const Map2d& g) {
  std::vector<double> fg, bg;
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    if (g.v[i] > 0.5) fg.push_back(p.v[i]);
    else bg.push_back(1.0 - p.v[i]);
  }
  const double u = static_cast<double>(fg.size()) / static_cast<double>(p.v.size());
  return u * object_score(fg) + (1.0 - u) * object_score(bg);
}

// SSIM-style structural similarity over one rectangular region.
inline double region_ssim(const Map2d& p, const Map2d& g, std::int64_t y0, std::int64_t y1,
                          std::int64_t x0, std::int64_t x1) {
  const double n = static_cast<double>((y1 - y0) * (x1 - x0));
  double mx = 0, my = 0;
  for (std::int64_t y = y0; y < y1; ++y)
    for (std::int64_t x = x0; x < x1; ++x) {
      mx += p.at(y, x);
      my += g.at(y, x);
    }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::int64_t y = y0; y < y1; ++y)
    for (std::int64_t x = x0; x < x1; ++x) {
      const double dx = p.at(y, x) - mx, dy = g.at(y, x) - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  const double denom = n - 1.0 + kEps;
  sxx /= denom;
  syy /= denom;
  sxy /= denom;
  const double a = 4.0 * mx * my * sxy;
  const double b = (mx * mx + my * my) * (sxx + syy);
  if (a != 0.0) return a / (b + kEps);
  if (b == 0.0) return 1.0;
  return 0.0;
}

inline double s_region(const Map2d& p, const Map2d& g) {
  // Centroid of the gt foreground, in 1-based pixel units, rounded.
  double total = 0, sx = 0, sy = 0;
  for (std::int64_t y = 0; y < g.h; ++y)
    for (std::int64_t x = 0; x < g.w; ++x) {
      const double v = g.at(y, x);
      total += v;
      sx += v * static_cast<double>(x + 1);
      sy += v * static_cast<double>(y + 1);
    }
  const auto cx = static_cast<std::int64_t>(std::lround(sx / total));
  const auto cy = static_cast<std::int64_t>(std::lround(sy / total));
  const double area = static_cast<double>(g.h * g.w);
  const double w1 = double(cx * cy) / area;
  const double w2 = double((g.w - cx) * cy) / area;
  const double w3 = double(cx * (g.h - cy)) / area;
  const double w4 = 1.0 - w1 - w2 - w3;
  // Quadrants: rows [0,cy) / [cy,h), cols [0,cx) / [cx,w). Empty ones carry
  // zero weight and are skipped.
  double q = 0;
  auto add = [&](double wgt, std::int64_t y0, std::int64_t y1, std::int64_t x0, std::int64_t x1) {
    if (y1 > y0 && x1 > x0) q += wgt * region_ssim(p, g, y0, y1, x0, x1);
  };
  add(w1, 0, cy, 0, cx);
  add(w2, 0, cy, cx, g.w);
  add(w3, cy, g.h, 0, cx);
  add(w4, cy, g.h, cx, g.w);
  return q;
}

}  // namespace detail

/// Structure measure: alpha * S_object + (1 - alpha) * S_region, alpha = 0.5,
/// clamped at 0. All-background gt gives 1 - mean(pred); all-foreground gt
/// gives mean(pred).
template <typename T>
double s_measure(const BasicTensor<T>& pred, const BasicTensor<T>& gt) {
  auto [p, g] = detail::pair_of(pred, gt);
  detail::check_range(p);
  double gmean = 0, pmean = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    gmean += g.v[i];
    pmean += p.v[i];
  }
  gmean /= static_cast<double>(p.v.size());
  pmean /= static_cast<double>(p.v.size());
  if (gmean == 0.0) return 1.0 - pmean;
  if (gmean == 1.0) return pmean;
  const double q = kAlpha * detail::s_object(p, g) + (1.0 - kAlpha) * detail::s_region(p, g);
  return std::max(q, 0.0);
}

struct MetricTriple {
  double f_max = 0, s_measure = 0, mae = 0;
};

template <typename T>
MetricTriple evaluate_pair(const BasicTensor<T>& pred, const BasicTensor<T>& gt) {
  return {f_max(pred, gt), s_measure(pred, gt), mae(pred, gt)};
}

}  // namespace stvs::metrics
