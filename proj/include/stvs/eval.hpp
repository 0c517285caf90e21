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

// Dataset-level evaluation over directories of PGM maps.
//
// Layout: either flat directories of maps (one sequence) or one
// subdirectory per sequence. Predictions pair with ground truth by file
// stem. Metrics are averaged per sequence, then over sequences.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stvs/image_io.hpp"
#include "stvs/metrics.hpp"
#include "stvs/parallel.hpp"

namespace stvs {

struct SequenceScore {
  std::string name;
  std::size_t frames = 0;
  metrics::MetricTriple mean;
};

struct EvalRecord {
  std::vector<SequenceScore> sequences;  // sorted by name
  metrics::MetricTriple mean;            // mean over sequences
  std::size_t frames = 0;
  std::vector<std::string> missing_pred;  // gt maps without a prediction
  std::vector<std::string> missing_gt;    // predictions without gt
};

namespace detail {

inline std::map<std::string, std::filesystem::path> maps_by_stem(const std::filesystem::path& dir) {
  std::map<std::string, std::filesystem::path> out;
  for (const auto& p : list_images(dir)) out[p.stem().string()] = p;
  return out;
}

inline std::vector<std::string> sequence_dirs(const std::filesystem::path& root) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Tensor read_map(const std::filesystem::path& p) {
  Tensor t = read_image(p);
  if (t.dim(0) != 1) throw FormatError(p.string() + ": saliency maps must be grayscale (P5)", 0);
  return t;
}

}  // namespace detail

inline EvalRecord evaluate_dataset(const std::filesystem::path& pred_dir,
                                   const std::filesystem::path& gt_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(pred_dir)) throw IoError("not a directory: '" + pred_dir.string() + "'");
  if (!fs::is_directory(gt_dir)) throw IoError("not a directory: '" + gt_dir.string() + "'");

  // (sequence name, sub-path); "." for the flat layout.
  std::vector<std::string> seqs = detail::sequence_dirs(gt_dir);
  const bool flat = seqs.empty();
  if (flat) seqs = {"."};

  struct Job {
    std::size_t seq;
    fs::path pred, gt;
  };
  std::vector<Job> jobs;
  EvalRecord rec;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const auto gdir = gt_dir / seqs[s];
    const auto pdir = pred_dir / seqs[s];
    const auto gts = detail::maps_by_stem(gdir);
    const auto preds = fs::is_directory(pdir) ? detail::maps_by_stem(pdir)
                                              : std::map<std::string, fs::path>{};
    const std::string prefix = flat ? "" : seqs[s] + "/";
    for (const auto& [stem, path] : gts) {
      auto it = preds.find(stem);
      if (it == preds.end()) rec.missing_pred.push_back(prefix + stem);
      else jobs.push_back({s, it->second, path});
    }
    for (const auto& [stem, path] : preds) {
      if (!gts.count(stem)) rec.missing_gt.push_back(prefix + stem);
    }
  }
  if (jobs.empty()) {
    throw std::invalid_argument("no prediction/ground-truth pairs share a file stem under '" +
                                pred_dir.string() + "' and '" + gt_dir.string() + "'");
  }

  std::vector<metrics::MetricTriple> scores(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    scores[i] = metrics::evaluate_pair(detail::read_map(jobs[i].pred), detail::read_map(jobs[i].gt));
  });

  std::vector<SequenceScore> per(seqs.size());
  for (std::size_t s = 0; s < seqs.size(); ++s) per[s].name = flat ? "all" : seqs[s];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& q = per[jobs[i].seq];
    q.frames += 1;
    q.mean.f_max += scores[i].f_max;
    q.mean.s_measure += scores[i].s_measure;
    q.mean.mae += scores[i].mae;
  }
  for (auto& q : per) {
    if (q.frames == 0) continue;
    const double n = static_cast<double>(q.frames);
    q.mean.f_max /= n;
    q.mean.s_measure /= n;
    q.mean.mae /= n;
    rec.sequences.push_back(q);
  }
  for (const auto& q : rec.sequences) {
    rec.frames += q.frames;
    rec.mean.f_max += q.mean.f_max;
    rec.mean.s_measure += q.mean.s_measure;
    rec.mean.mae += q.mean.mae;
  }
  const double ns = static_cast<double>(rec.sequences.size());
  rec.mean.f_max /= ns;
  rec.mean.s_measure /= ns;
  rec.mean.mae /= ns;
  return rec;
}

namespace detail {

inline std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string eval_csv(const EvalRecord& r) {
  std::ostringstream os;
  os << "sequence,frames,f_max,s_measure,mae\n";
  auto row = [&](const std::string& name, std::size_t n, const metrics::MetricTriple& m) {
    os << name << ',' << n << ',' << detail::fmt6(m.f_max) << ',' << detail::fmt6(m.s_measure)
       << ',' << detail::fmt6(m.mae) << '\n';
  };
  for (const auto& s : r.sequences) row(s.name, s.frames, s.mean);
  row("MEAN", r.frames, r.mean);
  return os.str();
}

inline std::string eval_table(const EvalRecord& r) {
  std::size_t w = 8;
  for (const auto& s : r.sequences) w = std::max(w, s.name.size());
  std::ostringstream os;
  auto cell = [](const std::string& s, std::size_t width, bool left) {
    std::string pad(width > s.size() ? width - s.size() : 0, ' ');
    return left ? s + pad : pad + s;
  };
  os << cell("sequence", w, true) << "  " << cell("frames", 6, false) << "  "
     << cell("F-max", 9, false) << "  " << cell("S-measure", 9, false) << "  "
     << cell("MAE", 9, false) << '\n';
  auto row = [&](const std::string& name, std::size_t n, const metrics::MetricTriple& m) {
    os << cell(name, w, true) << "  " << cell(std::to_string(n), 6, false) << "  "
       << cell(detail::fmt3(m.f_max), 9, false) << "  " << cell(detail::fmt3(m.s_measure), 9, false)
       << "  " << cell(detail::fmt3(m.mae), 9, false) << '\n';
  };
  for (const auto& s : r.sequences) row(s.name, s.frames, s.mean);
  os << std::string(w + 6 + 9 * 3 + 8, '-') << '\n';
  row("MEAN", r.frames, r.mean);
  return os.str();
}

inline void write_eval_csv(const EvalRecord& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << eval_csv(r);
}

}  // namespace stvs
