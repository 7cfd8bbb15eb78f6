// Copyright 2026 The fsed Authors.
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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails. Usage: fsed_acceptance <work_dir>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench.h"
#include "commands.h"
#include "fsed/checkpoint.h"
#include "fsed/evaluator.h"
#include "fsed/loss.h"
#include "fsed/network.h"
#include "fsed/synthesis.h"
#include "fsed/synthetic_bank.h"
#include "gradcheck.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace fsed;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli_run(const std::vector<std::string>& args) {
  std::vector<std::string> argv = {"fsed"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(argv, out, err);
  if (code != 0) std::fprintf(stderr, "fsed %s failed (%d): %s\n", args.front().c_str(), code, err.str().c_str());
  return code;
}

MelFeatures random_features(Rng& rng) {
  MelFeatures x;
  x.values.resize(40, 100);
  for (int c = 0; c < 40; ++c) {
    for (int t = 0; t < 100; ++t) x.values(c, t) = static_cast<float>(rng.normal(-5.0, 3.0));
  }
  return x;
}

// Criterion 1: loss on a (D, l, w) grid against an independent formula.
Verdict loss_grid() {
  const LossConfig cfg;
  double worst = 0.0;
  int points = 0;
  for (int i = 0; i < 250; ++i) {
    const double d = i * 0.012;
    for (int l = 0; l <= 1; ++l) {
      for (double w : {1.0, 2.0}) {
        const double hinge = std::max(0.0, w * cfg.margin - d);
        const double expected = l * d * d + (1 - l) * hinge * hinge;
        worst = std::max(worst, std::abs(weighted_contrastive_loss(d, l == 1, cfg, w) - expected));
        ++points;
      }
    }
  }
  return {points == 1000 && worst <= 1e-12, format("%d points, max |error| %.3g", points, worst)};
}

// Criterion 2: end-to-end pair-loss gradients against central differences.
Verdict gradient_check() {
  Rng rng(2);
  const Network<double> net = init_network<double>(NetworkConfig{}, rng);
  const LossConfig loss;
  const MelFeatures a = random_features(rng), b = random_features(rng);
  // A nearby negative keeps the weighted hinge active.
  MelFeatures near = a;
  for (int c = 0; c < 40; ++c) {
    for (int t = 0; t < 100; ++t) near.values(c, t) += static_cast<float>(rng.normal(0.0, 0.3));
  }
  const Vector<double> ea = forward(net, a), en = forward(net, near);
  const double d_near = (ea - en).norm();
  const auto same = oracle::pair_loss_gradient_check(net, a, b, true, loss, 1.0, 100, rng);
  const auto diff = oracle::pair_loss_gradient_check(net, a, near, false, loss, 2.0, 100, rng);
  const double worst = std::max(same.max_relative_error, diff.max_relative_error);
  const int rejected = same.rejected_kinks + diff.rejected_kinks;
  const bool hinge_active = d_near < 2.0 * loss.margin;
  return {worst < 1e-4 && hinge_active,
          format("200 probes, max relative error %.3g, %d probes crossing a ReLU kink redrawn, negative pair D=%.3f",
                 worst, rejected, d_near)};
}

// Criterion 3: category and background shares over 10^4 sampled pairs.
Verdict sampler_ratios() {
  SyntheticBankConfig bcfg;
  Rng bank_rng(3);
  auto specs = default_tone_classes();
  specs.resize(4);
  const SourceBank bank = make_synthetic_bank(bank_rng, specs, bcfg);
  const FeatureExtractor fx;
  const SamplerConfig cfg;
  Rng rng(4);
  std::array<int, 4> counts{};
  int with_background = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Pair p = sample_pair(rng, bank, fx, cfg);
    ++counts[static_cast<size_t>(p.category)];
    if (p.first.label == bank.background_label() || p.second.label == bank.background_label()) ++with_background;
  }
  bool ok = std::abs(with_background / double(n) - 0.5) <= 0.02;
  std::string shares;
  for (int c : counts) {
    ok = ok && std::abs(c / double(n) - 0.25) <= 0.02;
    shares += format("%.4f ", c / double(n));
  }
  return {ok, format("category shares %sbackground share %.4f", shares.c_str(), with_background / double(n))};
}

// Criterion 4: matcher against exhaustive maximum bipartite matching.
Verdict matcher_oracle() {
  Rng rng(5);
  int agree = 0;
  const int instances = 1000;
  for (int i = 0; i < instances; ++i) {
    std::vector<Event> refs, dets;
    const size_t nr = rng.index(9), nd = rng.index(9);
    auto draw = [&](std::vector<Event>& out, size_t n) {
      for (size_t k = 0; k < n; ++k) {
        // Mostly one clip and class so that candidate edges conflict.
        const std::string clip = rng.bernoulli(0.85) ? "c0" : "c1";
        const std::string label = rng.bernoulli(0.85) ? "target" : "other";
        const double onset = rng.uniform(0.0, 3.0);
        out.push_back({clip, onset, onset + 0.5, label, 0.0});
      }
    };
    draw(refs, nr);
    draw(dets, nd);
    std::vector<oracle::Onset> ro, dd;
    for (const auto& e : refs) ro.push_back({e.clip_id, e.label, e.onset_s});
    for (const auto& e : dets) dd.push_back({e.clip_id, e.label, e.onset_s});
    const EvalReport r = evaluate(refs, dets, 0.5);
    int tp = 0, fp = 0, fn = 0;
    for (const auto& [label, s] : r.per_class) {
      tp += s.counts.true_positives;
      fp += s.counts.false_positives;
      fn += s.counts.false_negatives;
    }
    const int best = oracle::max_matching(ro, dd, 0.5);
    if (tp == best && tp + fp == static_cast<int>(nd) && tp + fn == static_cast<int>(nr)) ++agree;
  }
  return {agree == instances, format("%d/%d instances agree", agree, instances)};
}

// Criterion 5: parameter budget and embedding size.
Verdict parameter_budget() {
  Rng rng(6);
  const Network<float> net = init_network<float>(NetworkConfig{}, rng);
  Rng xr(7);
  const auto dim = forward(net, random_features(xr)).size();
  const size_t n = net.parameter_count();
  return {n >= 60000 && n <= 80000 && dim == 128, format("%zu parameters, embedding dim %ld", n, long(dim))};
}

// Criterion 6: proposed vs ablation on the synthetic benchmark.
Verdict synthetic_trend(const fs::path& bench_dir) {
  if (cli_run({"bench-synthetic", "--out-dir", bench_dir.string()}) != 0) return {false, "bench-synthetic failed"};
  const auto j = nlohmann::json::parse(slurp(bench_dir / "report.json"));
  const double proposed = j["configs"]["proposed"]["f1"]["5"];
  const double ablation = j["configs"]["ablation"]["f1"]["5"];
  return {proposed >= 0.80 && proposed - ablation >= 0.10,
          format("5-shot F1 proposed %.4f, ablation %.4f, gain %+.4f", proposed, ablation, proposed - ablation)};
}

// Criterion 7: prototype distance at true onsets for k = 1 and k = 10.
Verdict shot_scaling(const fs::path& bench_dir) {
  const Network<float> net = load_checkpoint(bench_dir / "checkpoint_proposed.bin");
  const cli::BenchConfig cfg;
  const cli::BenchBanks banks = cli::make_bench_banks(cfg);
  const std::vector<int> shots = {1, 10};
  const auto means = cli::onset_distance_by_shots(net, banks, cfg, shots, 20, 50);
  return {means[1] <= means[0], format("mean onset distance k=1 %.4f, k=10 %.4f (20 draws, 50 clips)", means[0],
                                       means[1])};
}

// Criterion 8: bit-identical training and benchmark outputs.
Verdict determinism(const fs::path& work, const fs::path& first_bench) {
  const fs::path bank = work / "det_bank";
  if (cli_run({"synth-bank", "--out-dir", bank.string(), "--clips-per-class", "4", "--background-s", "12", "--seed",
               "8"}) != 0) {
    return {false, "synth-bank failed"};
  }
  std::vector<std::string> checkpoints;
  for (const char* name : {"a.bin", "b.bin"}) {
    const fs::path out = work / name;
    if (cli_run({"train", "--manifest", (bank / "manifest.jsonl").string(), "--out", out.string(), "--held-out",
                 "tone500,tone1200", "--epochs", "3", "--steps-per-epoch", "4", "--batch-size", "8",
                 "--verification-pairs", "16", "--seed", "9"}) != 0) {
      return {false, "train failed"};
    }
    checkpoints.push_back(slurp(out));
  }
  const bool train_same = !checkpoints[0].empty() && checkpoints[0] == checkpoints[1];

  const fs::path second = work / "bench_repeat";
  if (cli_run({"bench-synthetic", "--out-dir", second.string()}) != 0) return {false, "second bench failed"};
  bool bench_same = true;
  for (const char* name : {"report.json", "checkpoint_proposed.bin", "checkpoint_ablation.bin", "curves_proposed.csv",
                           "curves_ablation.csv"}) {
    const std::string a = slurp(first_bench / name), b = slurp(second / name);
    bench_same = bench_same && !a.empty() && a == b;
  }
  return {train_same && bench_same,
          format("train checkpoints %s, benchmark report and checkpoints %s", train_same ? "identical" : "DIFFER",
                 bench_same ? "identical" : "DIFFER")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // <= 0: no runtime bound
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fsed_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path bench_dir = work / "bench";

  const std::vector<Criterion> criteria = {
      {1, "loss grid", 1.0, loss_grid},
      {2, "gradient check", 120.0, gradient_check},
      {3, "sampler ratios", 30.0, sampler_ratios},
      {4, "matcher oracle", 30.0, matcher_oracle},
      {5, "parameter budget", 0.0, parameter_budget},
      {6, "synthetic trend", 600.0, [&] { return synthetic_trend(bench_dir); }},
      {7, "shot scaling", 120.0, [&] { return shot_scaling(bench_dir); }},
      {8, "determinism", 0.0, [&] { return determinism(work, bench_dir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_s <= 0.0 || seconds <= c.budget_s;
    const bool pass = v.pass && in_budget;
    failures += pass ? 0 : 1;
    std::string timing = format("%.2f s", seconds);
    if (c.budget_s > 0.0) timing += format(" (budget %.0f s%s)", c.budget_s, in_budget ? "" : ", EXCEEDED");
    std::printf("%s criterion %d %s: %s; %s\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
