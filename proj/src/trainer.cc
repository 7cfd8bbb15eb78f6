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

#include "fsed/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "fsed/error.h"
#include "fsed/optimizer.h"
#include "fsed/parallel.h"

namespace fsed {
namespace {

constexpr uint64_t kInitStream = 0;
constexpr uint64_t kVerificationStream = 1;
constexpr uint64_t kStepStreamBase = 1000;


// Forward both members, then backward the loss scaled by `scale` into
// `grads`.
double accumulate_pair(const Network<float>& net, const Pair& pair, const LossConfig& loss, float scale,
                       std::span<float> grads) {
  ActivationCache<float> cache_a, cache_b;
  const Vector<float> ea = forward(net, pair.first.features, &cache_a);
  const Vector<float> eb = forward(net, pair.second.features, &cache_b);
  const std::span<const float> a(ea.data(), static_cast<size_t>(ea.size()));
  const std::span<const float> b(eb.data(), static_cast<size_t>(eb.size()));
  const double distance = pair_distance(a, b);
  auto g = loss_gradients(a, b, pair.same, loss, pair.weight);
  for (auto& v : g.first) v *= scale;
  for (auto& v : g.second) v *= scale;
  backward_accumulate(net, cache_a, std::span<const float>(g.first), grads);
  backward_accumulate(net, cache_b, std::span<const float>(g.second), grads);
  return weighted_contrastive_loss(distance, pair.same, loss, pair.weight);
}

double pair_loss(const Network<float>& net, const Pair& pair, const LossConfig& loss) {
  const Vector<float> ea = forward(net, pair.first.features);
  const Vector<float> eb = forward(net, pair.second.features);
  const double distance = pair_distance(std::span<const float>(ea.data(), static_cast<size_t>(ea.size())),
                                        std::span<const float>(eb.data(), static_cast<size_t>(eb.size())));
  return weighted_contrastive_loss(distance, pair.same, loss, pair.weight);
}

std::vector<Pair> draw_verification_pairs(const SourceBank& held_out, const SamplerConfig& sampler, Rng& rng,
                                          int n_pairs, const FeatureExtractor& fx) {
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    PairCategory category = draw_category(rng, sampler.background_class);
    while (category == PairCategory::kDifferentEvent && held_out.event_class_count() < 2) {
      category = draw_category(rng, sampler.background_class);
    }
    pairs.push_back(make_pair(rng, held_out, fx, sampler, category));
  }
  return pairs;
}

double mean_pair_loss(const Network<float>& net, std::span<const Pair> pairs, const LossConfig& loss, int workers) {
  std::vector<double> losses(pairs.size());
  parallel_for(pairs.size(), workers, [&](size_t i) { losses[i] = pair_loss(net, pairs[i], loss); });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(pairs.size());
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.batch_size < 1) throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  if (config.max_epochs < 1) throw Error(ErrorCode::kInvalidConfig, "max_epochs must be >= 1");
  if (config.steps_per_epoch < 0) throw Error(ErrorCode::kInvalidConfig, "steps_per_epoch must be >= 0");
  if (!(config.lr >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning rate must be >= 0");
  if (config.ebr_min_db > config.ebr_max_db) throw Error(ErrorCode::kInvalidConfig, "EBR range is inverted");
  validate(config.loss);
  validate(config.network);
}

SamplerConfig sampler_config(const TrainConfig& config) {
  SamplerConfig s;
  s.window_frames = config.network.frames;
  s.ebr_min_db = config.ebr_min_db;
  s.ebr_max_db = config.ebr_max_db;
  s.background_class = config.background_class;
  s.background_weight = config.background_class ? config.loss.background_weight : 1.0;
  return s;
}

int steps_per_epoch(const TrainConfig& config, const SourceBank& bank) {
  if (config.steps_per_epoch > 0) return config.steps_per_epoch;
  const size_t sources = std::max<size_t>(bank.event_source_count(), 1);
  return static_cast<int>((sources + static_cast<size_t>(config.batch_size) - 1) /
                          static_cast<size_t>(config.batch_size));
}

void check_disjoint(const SourceBank& training, const SourceBank& held_out) {
  for (const auto& name : held_out.class_names) {
    if (std::find(training.class_names.begin(), training.class_names.end(), name) != training.class_names.end()) {
      throw Error(ErrorCode::kLeakage, "class '" + name + "' is both a training and a held-out class");
    }
  }
}

double verification_loss(const Network<float>& net, const SourceBank& held_out,
                         std::span<const std::string> training_classes, const TrainConfig& config, Rng& rng,
                         int n_pairs, const FeatureExtractor& fx) {
  if (n_pairs <= 0) throw Error(ErrorCode::kEmptyBatch, "verification needs at least one pair");
  for (const auto& name : held_out.class_names) {
    if (std::find(training_classes.begin(), training_classes.end(), name) != training_classes.end()) {
      throw Error(ErrorCode::kLeakage, "held-out class '" + name + "' was used for training");
    }
  }
  const auto pairs = draw_verification_pairs(held_out, sampler_config(config), rng, n_pairs, fx);
  return mean_pair_loss(net, pairs, config.loss, config.workers);
}

TrainResult train(const SourceBank& bank, const SourceBank* held_out, const TrainConfig& config,
                  const FeatureExtractor& fx) {
  validate(config);
  bank.validate();
  if (bank.event_class_count() < 2) {
    throw Error(ErrorCode::kInsufficientClasses, "training needs at least two event classes");
  }
  if (held_out) {
    held_out->validate();
    check_disjoint(bank, *held_out);
  }
  if (fx.config().mel_channels != config.network.mel_channels) {
    throw Error(ErrorCode::kShapeMismatch, "feature channels differ from the network input");
  }

  const Rng master(config.seed);
  Rng init_rng = master.split(kInitStream);
  Network<float> net = init_network<float>(config.network, init_rng);
  AdamState<float> adam(AdamConfig{.lr = config.lr}, net.parameter_count());
  const SamplerConfig sampler = sampler_config(config);

  std::vector<Pair> verification;
  if (held_out && config.verification_pairs > 0) {
    Rng vrng = master.split(kVerificationStream);
    verification = draw_verification_pairs(*held_out, sampler, vrng, config.verification_pairs, fx);
  }

  const int steps = steps_per_epoch(config, bank);
  const size_t batch = static_cast<size_t>(config.batch_size);
  const size_t n_params = net.parameter_count();
  std::vector<float> pair_grads(batch * n_params);
  std::vector<float> grads(n_params);
  std::vector<double> pair_losses(batch);
  std::vector<Pair> pairs(batch);

  TrainResult result{net, {}};
  double best = std::numeric_limits<double>::infinity();
  int64_t global_step = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double epoch_loss = 0.0;
    for (int step = 0; step < steps; ++step, ++global_step) {
      const Rng step_rng = master.split(kStepStreamBase + static_cast<uint64_t>(global_step));
      std::fill(pair_grads.begin(), pair_grads.end(), 0.0f);
      const float scale = 1.0f / static_cast<float>(batch);
      parallel_for(batch, config.workers, [&](size_t i) {
        Rng pair_rng = step_rng.split(i);
        pairs[i] = sample_pair(pair_rng, bank, fx, sampler);
        pair_losses[i] = accumulate_pair(net, pairs[i], config.loss, scale,
                                         std::span<float>(pair_grads).subspan(i * n_params, n_params));
      });
      std::fill(grads.begin(), grads.end(), 0.0f);
      double batch_loss = 0.0;
      for (size_t i = 0; i < batch; ++i) {
        const float* g = pair_grads.data() + i * n_params;
        for (size_t k = 0; k < n_params; ++k) grads[k] += g[k];
        batch_loss += pair_losses[i];
      }
      batch_loss /= static_cast<double>(batch);
      try {
        if (!std::isfinite(batch_loss)) throw Error(ErrorCode::kNonFiniteGradient, "loss is not finite");
        adam_step(net, std::span<const float>(grads), adam);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFiniteGradient) throw;
        throw Error(ErrorCode::kNonFiniteGradient, "epoch " + std::to_string(epoch) + " step " +
                                                       std::to_string(step) + ": " + e.what());
      }
      epoch_loss += batch_loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_loss / steps;
    if (!verification.empty()) record.verification_loss = mean_pair_loss(net, verification, config.loss, config.workers);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.epochs.push_back(record);

    const double criterion = verification.empty() ? record.train_loss : record.verification_loss;
    if (!config.select_best || criterion < best) {
      best = criterion;
      result.network = net;
      result.history.best_epoch = epoch;
    }
    if (config.on_epoch) config.on_epoch(record);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "epoch,train_loss,verif_loss,seconds\n";
  char line[160];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.3f\n", e.epoch, e.train_loss, e.verification_loss,
                  e.seconds);
    out << line;
  }
}

}  // namespace fsed
