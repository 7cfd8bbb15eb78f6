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

#ifndef FSED_TRAINER_H_
#define FSED_TRAINER_H_

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsed/dsp.h"
#include "fsed/loss.h"
#include "fsed/network.h"
#include "fsed/rng.h"
#include "fsed/synthesis.h"

namespace fsed {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double verification_loss = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
};

struct TrainConfig {
  int batch_size = 64;
  int max_epochs = 100;
  int steps_per_epoch = 0;  // 0: ceil(event source count / batch_size)
  double lr = 1e-3;
  LossConfig loss;
  bool background_class = true;  // false: event-only pairs, w = 1
  uint64_t seed = 0;
  int verification_pairs = 128;
  bool select_best = true;  // false: return the final epoch
  int workers = 1;
  double ebr_min_db = 0.0;
  double ebr_max_db = 18.0;
  NetworkConfig network;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Throws kInvalidConfig.
void validate(const TrainConfig& config);

// Sampler settings implied by a training config.
SamplerConfig sampler_config(const TrainConfig& config);

int steps_per_epoch(const TrainConfig& config, const SourceBank& bank);

struct TrainResult {
  Network<float> network;
  TrainHistory history;
};

// Pair-based metric learning with Adam. `held_out` (may be null) supplies
// the verification loss used for model selection; its classes must be
// disjoint from the training classes. Results are identical for any worker
// count: pairs come from per-pair rng streams and gradients are reduced in
// pair order. NonFiniteGradient errors carry the epoch and step.
TrainResult train(const SourceBank& bank, const SourceBank* held_out, const TrainConfig& config,
                  const FeatureExtractor& fx);

// Mean weighted contrastive loss over n_pairs pairs drawn from `held_out`.
// Categories that the held-out bank cannot realize (different-event pairs
// with a single class) are redrawn. Throws kEmptyBatch for n_pairs == 0 and
// kLeakage if a held-out class is also a training class.
double verification_loss(const Network<float>& net, const SourceBank& held_out,
                         std::span<const std::string> training_classes, const TrainConfig& config, Rng& rng,
                         int n_pairs, const FeatureExtractor& fx);

// Throws kLeakage when the two banks share a class name.
void check_disjoint(const SourceBank& training, const SourceBank& held_out);

// Columns: epoch, train_loss, verif_loss, seconds.
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace fsed

#endif  // FSED_TRAINER_H_
