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

// stvs: inference, evaluation, benchmarks and checks.
//
// Exit codes: 0 success, 1 a check failed or a runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "stvs/stvs.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Shape3 {
  std::int64_t c, h, w;
};

Shape3 parse_shape(const std::string& spec) {
  static const std::regex re(R"((\d+)x(\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(spec, m, re)) throw UsageError("--shape must look like CxHxW, got '" + spec + "'");
  Shape3 s{std::stoll(m[1]), std::stoll(m[2]), std::stoll(m[3])};
  if (s.c < 1 || s.h < 1 || s.w < 1) throw UsageError("--shape extents must be >= 1");
  return s;
}

stvs::NetworkConfig config_or_toy(const std::string& path) {
  return path.empty() ? stvs::NetworkConfig::toy() : stvs::load_config(path);
}

// --- infer -----------------------------------------------------------------

struct InferArgs {
  std::string weights, config, frames, out;
  int interval = 0;
  bool all_stages = false;
};

int run_infer(const InferArgs& a) {
  const auto cfg = stvs::load_config(a.config);
  const auto weights = stvs::NetworkWeights::from_store(stvs::load_weights(a.weights), cfg);
  fs::create_directories(a.out);
  auto stream = stvs::clip_iter(a.frames, a.interval);
  std::size_t written = 0;
  while (auto clip = stream.next()) {
    const auto H = clip->frames[1].dim(1), W = clip->frames[1].dim(2);
    stvs::FrameClip in = *clip;
    for (auto& f : in.frames) f = stvs::resize_to(f, cfg.input_size, cfg.input_size);
    const auto result = stvs::network_forward(in, weights, cfg);
    const auto stem = fs::path(clip->paths[1]).stem().string();
    const int stages = a.all_stages ? stvs::kNumStages : 1;
    for (int d = 1; d <= stages; ++d) {
      const auto name = a.all_stages ? stem + "_s" + std::to_string(d) + ".pgm" : stem + ".pgm";
      stvs::write_gray(fs::path(a.out) / name, stvs::resize_to(result.stage(d, 1), H, W));
      ++written;
    }
  }
  std::cout << "clips=" << stream.size() << " maps_written=" << written << " out=" << a.out << '\n';
  return kOk;
}

// --- eval ------------------------------------------------------------------

int run_eval(const std::string& pred, const std::string& gt, const std::string& out) {
  const auto rec = stvs::evaluate_dataset(pred, gt);
  std::cout << stvs::eval_table(rec);
  for (const auto& m : rec.missing_pred) std::cout << "missing prediction: " << m << '\n';
  for (const auto& m : rec.missing_gt) std::cout << "missing ground truth: " << m << '\n';
  if (!out.empty()) stvs::write_eval_csv(rec, out);
  return kOk;
}

// --- bench -----------------------------------------------------------------

int run_bench(const std::string& op, const std::string& shape, int trials,
              const std::string& config, const std::string& csv) {
  if (trials < stvs::kMinTrials) {
    throw UsageError("--trials must be >= " + std::to_string(stvs::kMinTrials));
  }
  stvs::BenchReport r;
  if (op == "forward") {
    auto cfg = config_or_toy(config);
    if (!shape.empty()) {
      const auto s = parse_shape(shape);
      if (s.c != 3 || s.h != s.w) throw UsageError("forward --shape must be 3xSxS");
      cfg.input_size = s.h;
      cfg.validate();
    }
    r = stvs::bench_forward(cfg, trials);
  } else {
    const auto s = parse_shape(shape.empty() ? "64x64x64" : shape);
    if (op == "cyclic-pad") r = stvs::bench_padding(s.c, s.h, s.w, trials);
    else if (op == "shuffle") r = stvs::bench_shuffle(s.c, s.h, s.w, trials);
    else if (op == "conv3d") r = stvs::bench_conv3d(s.c, s.h, s.w, trials);
    else throw UsageError("unknown --op '" + op + "'");
  }
  std::cout << r.to_text() << '\n';
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw stvs::IoError("cannot write '" + csv + "'");
    f << stvs::BenchReport::csv_header() << '\n' << r.to_csv() << '\n';
  }
  return r.equivalent ? kOk : kFailed;
}

// --- gradcheck -------------------------------------------------------------

int run_gradcheck(const std::string& op, std::uint64_t seed, int seeds) {
  std::vector<std::string> ops;
  if (op == "all") ops = stvs::gradcheck_ops();
  else if (std::find(stvs::gradcheck_ops().begin(), stvs::gradcheck_ops().end(), op) !=
           stvs::gradcheck_ops().end())
    ops = {op};
  else throw UsageError("unknown --op '" + op + "'");
  if (seeds < 1) throw UsageError("--seeds must be >= 1");
  bool ok = true;
  for (const auto& name : ops) {
    for (int k = 0; k < seeds; ++k) {
      const auto r = stvs::fd_gradcheck(name, seed + static_cast<std::uint64_t>(k));
      std::printf("%-16s seed=%-4llu coords=%-5zu max_rel_err=%.3e max_abs_err=%.3e %s\n",
                  r.op.c_str(), static_cast<unsigned long long>(r.seed), r.coords, r.max_rel_err,
                  r.max_abs_err, r.pass ? "PASS" : "FAIL");
      ok = ok && r.pass;
    }
  }
  return ok ? kOk : kFailed;
}

// --- selftest --------------------------------------------------------------

int run_selftest(std::uint64_t seed) {
  bool ok = true;
  for (const auto& s : stvs::run_selftest(seed)) {
    std::printf("%-10s %s  %s\n", s.name.c_str(), s.pass ? "PASS" : "FAIL", s.detail.c_str());
    ok = ok && s.pass;
  }
  std::cout << (ok ? "selftest: all suites passed\n" : "selftest: FAILED\n");
  return ok ? kOk : kFailed;
}

// --- train-toy -------------------------------------------------------------

int run_train_toy(std::uint64_t seed, int steps, const std::string& out) {
  if (steps < 1) throw UsageError("--steps must be >= 1");
  const auto r = stvs::tm_overfit_demo(seed, steps);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw stvs::IoError("cannot write '" + out + "'");
    f << "step,loss\n";
    for (std::size_t i = 0; i < r.losses.size(); ++i) f << i << ',' << r.losses[i] << '\n';
  }
  const double first = r.losses.front(), last = r.losses.back();
  std::printf("steps=%zu initial_loss=%.6f final_loss=%.6f ratio=%.4f%s\n", r.losses.size(), first,
              last, last / first, r.diverged ? " DIVERGED" : "");
  return r.diverged ? kFailed : kOk;
}

int run_init_weights(const std::string& config, std::uint64_t seed, const std::string& out,
                     const std::string& config_out) {
  const auto cfg = config_or_toy(config);
  const auto store = stvs::init_weights(cfg, seed);
  stvs::save_weights(store, out);
  if (!config_out.empty()) stvs::save_config(cfg, config_out);
  std::cout << "tensors=" << store.size() << " out=" << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal video saliency engine"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all hardware threads)");

  InferArgs infer;
  auto* c_infer = app.add_subcommand("infer", "write saliency maps for every clip of a frame directory");
  c_infer->add_option("--weights", infer.weights)->required()->check(CLI::ExistingFile);
  c_infer->add_option("--config", infer.config)->required()->check(CLI::ExistingFile);
  c_infer->add_option("--frames", infer.frames)->required()->check(CLI::ExistingDirectory);
  c_infer->add_option("--out", infer.out)->required();
  c_infer->add_option("--interval", infer.interval, "frame interval 0..6")->check(CLI::Range(0, 6));
  c_infer->add_flag("--all-stages", infer.all_stages, "write all five side outputs");

  std::string pred, gt, eval_out;
  auto* c_eval = app.add_subcommand("eval", "score predictions against ground truth");
  c_eval->add_option("--pred", pred)->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--gt", gt)->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--out", eval_out, "CSV report path");

  std::string bench_op, bench_shape, bench_config, bench_csv;
  int trials = stvs::kMinTrials;
  auto* c_bench = app.add_subcommand("bench", "median-of-trials microbenchmark");
  c_bench->add_option("--op", bench_op)->required()->check(
      CLI::IsMember({"cyclic-pad", "shuffle", "conv3d", "forward"}));
  c_bench->add_option("--shape", bench_shape, "CxHxW (forward: 3xSxS)");
  c_bench->add_option("--trials", trials);
  c_bench->add_option("--config", bench_config, "network config for --op forward");
  c_bench->add_option("--csv", bench_csv);

  std::string gc_op = "all";
  std::uint64_t gc_seed = 1;
  int gc_seeds = 1;
  auto* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  c_grad->add_option("--op", gc_op, "op name or 'all'");
  c_grad->add_option("--seed", gc_seed);
  c_grad->add_option("--seeds", gc_seeds, "number of consecutive seeds");

  std::uint64_t st_seed = 1;
  auto* c_self = app.add_subcommand("selftest", "run every oracle-equivalence suite");
  c_self->add_option("--seed", st_seed);

  std::uint64_t tt_seed = 1;
  int tt_steps = 500;
  std::string tt_out;
  auto* c_train = app.add_subcommand("train-toy", "overfit one temporal module to a teacher");
  c_train->add_option("--seed", tt_seed);
  c_train->add_option("--steps", tt_steps);
  c_train->add_option("--out", tt_out, "loss curve CSV");

  std::string iw_config, iw_out, iw_config_out;
  std::uint64_t iw_seed = 0;
  auto* c_init = app.add_subcommand("init-weights", "write a randomly initialized weight file");
  c_init->add_option("--config", iw_config, "network config (default: toy)");
  c_init->add_option("--seed", iw_seed);
  c_init->add_option("--out", iw_out)->required();
  c_init->add_option("--config-out", iw_config_out, "also write the config used");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    stvs::set_num_threads(threads);
    if (*c_infer) return run_infer(infer);
    if (*c_eval) return run_eval(pred, gt, eval_out);
    if (*c_bench) return run_bench(bench_op, bench_shape, trials, bench_config, bench_csv);
    if (*c_grad) return run_gradcheck(gc_op, gc_seed, gc_seeds);
    if (*c_self) return run_selftest(st_seed);
    if (*c_train) return run_train_toy(tt_seed, tt_steps, tt_out);
    if (*c_init) return run_init_weights(iw_config, iw_seed, iw_out, iw_config_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
