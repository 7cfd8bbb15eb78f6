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

#include "fsed/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsed/error.h"

namespace fsed {
namespace {

std::atomic<uint64_t> g_zero_distance_repulsions{0};

}  // namespace

void validate(const LossConfig& config) {
  if (!(config.margin > 0.0)) throw Error(ErrorCode::kInvalidConfig, "margin must be positive");
  if (!(config.background_weight >= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "background margin weight must be >= 1");
  }
}

template <typename T>
T pair_distance(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "embedding sizes " + std::to_string(a.size()) + " and " +
                                               std::to_string(b.size()) + " differ");
  }
  T acc = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double weighted_contrastive_loss(double distance, bool same, const LossConfig& config, double weight) {
  if (!(distance >= 0.0)) throw Error(ErrorCode::kInvalidDistance, "distance must be non-negative");
  if (same) return distance * distance;
  const double hinge = std::max(weight * config.margin - distance, 0.0);
  return hinge * hinge;
}

template <typename T>
PairGradients<T> loss_gradients(std::span<const T> first, std::span<const T> second, bool same,
                                const LossConfig& config, double weight) {
  const T distance = pair_distance(first, second);
  PairGradients<T> g{std::vector<T>(first.size(), T(0)), std::vector<T>(second.size(), T(0))};
  T scale = 0;  // dL/de1 = scale * (e1 - e2)
  if (same) {
    scale = T(2);
  } else {
    const T wm = static_cast<T>(weight * config.margin);
    if (distance >= wm) return g;
    if (distance == T(0)) {
      g_zero_distance_repulsions.fetch_add(1, std::memory_order_relaxed);
      return g;
    }
    scale = T(-2) * (wm - distance) / distance;
  }
  for (size_t i = 0; i < first.size(); ++i) {
    const T d = scale * (first[i] - second[i]);
    g.first[i] = d;
    g.second[i] = -d;
  }
  return g;
}

uint64_t zero_distance_repulsions() { return g_zero_distance_repulsions.load(std::memory_order_relaxed); }

double batch_objective(std::span<const PairTerm> pairs, const LossConfig& config) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyBatch, "batch objective over zero pairs");
  double sum = 0.0;
  for (const auto& p : pairs) sum += weighted_contrastive_loss(p.distance, p.same, config, p.weight);
  return sum / static_cast<double>(pairs.size());
}

template float pair_distance<float>(std::span<const float>, std::span<const float>);
template double pair_distance<double>(std::span<const double>, std::span<const double>);
template PairGradients<float> loss_gradients<float>(std::span<const float>, std::span<const float>, bool,
                                                    const LossConfig&, double);
template PairGradients<double> loss_gradients<double>(std::span<const double>, std::span<const double>, bool,
                                                      const LossConfig&, double);

}  // namespace fsed
