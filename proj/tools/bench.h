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

#ifndef FSED_TOOLS_BENCH_H_
#define FSED_TOOLS_BENCH_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsed/synthetic_bank.h"
#include "fsed/trainer.h"

namespace fsed::cli {

struct BenchConfig {
  uint64_t seed = 20260101;
  SyntheticBankConfig bank = [] {
    SyntheticBankConfig b;
    b.clips_per_class = 30;
    return b;
  }();
  std::vector<std::string> train_classes = {"tone300", "tone800", "tone1800", "tone2600"};
  std::string verify_class = "tone500";
  std::string target_class = "tone1200";
  int support_pool = 10;  // target clips reserved for support sets
  int epochs = 60;
  int batch_size = 64;
  int verification_pairs = 64;
  int dev_clips = 80;
  int eval_clips = 80;
  double clip_s = 10.0;
  double presence = 0.5;
  int distractors = 0;
  std::vector<double> support_ebr_db = {18.0};
  int min_gap_windows = 5;
  std::vector<int> shots = {1, 5, 10};
  int draws = 5;
  int workers = 1;
};

struct ShotResult {
  int shots = 0;
  double mean_f1 = 0.0;
  double mean_sigma = 0.0;
  std::vector<double> f1;  // per draw
};

struct ConfigResult {
  std::string name;
  bool background_class = true;
  int best_epoch = 0;
  double final_train_loss = 0.0;
  double final_verification_loss = 0.0;
  std::vector<ShotResult> shots;

  const ShotResult* at(int k) const;
};

struct BenchResult {
  ConfigResult proposed;
  ConfigResult ablation;
  std::optional<Network<float>> proposed_network;
};

// Generates the synthetic corpus, trains both configurations, tunes a
// threshold on the dev split for every support draw and scores the eval
// split. Writes report.json, report.txt, per-config checkpoints, histories
// and distance curves under out_dir.
BenchResult run_bench(const BenchConfig& config, const std::filesystem::path& out_dir);

std::string bench_report_json(const BenchConfig& config, const BenchResult& result);
std::string bench_report_table(const BenchResult& result);

// Banks used by the benchmark, exposed for reuse by tests.
struct BenchBanks {
  SourceBank train;
  SourceBank verify;
  SourceBank support;  // target class, support pool
  SourceBank query_dev;  // target class and distractors, dev backgrounds
  SourceBank query_eval;  // target class and distractors, eval backgrounds
};
BenchBanks make_bench_banks(const BenchConfig& config);

// Mean distance between the prototype and the windows centered on true
// target onsets, averaged over `draws` support draws per shot count.
std::vector<double> onset_distance_by_shots(const Network<float>& net, const BenchBanks& banks,
                                            const BenchConfig& config, std::span<const int> shots, int draws,
                                            int clips);

}  // namespace fsed::cli

#endif  // FSED_TOOLS_BENCH_H_
