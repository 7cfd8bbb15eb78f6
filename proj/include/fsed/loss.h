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

#ifndef FSED_LOSS_H_
#define FSED_LOSS_H_

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

namespace fsed {

struct LossConfig {
  double margin = 1.0;            // m
  double background_weight = 2.0; // w applied to pairs with a background member
};

// Throws kInvalidConfig unless margin > 0 and background_weight >= 1.
void validate(const LossConfig& config);

// Euclidean distance. Throws kShapeMismatch on a size mismatch.
template <typename T>
T pair_distance(std::span<const T> a, std::span<const T> b);

// l = 1: D^2.  l = 0: max(w*m - D, 0)^2.  With w = 1 this is the plain
// contrastive loss. Throws kInvalidDistance for D < 0.
double weighted_contrastive_loss(double distance, bool same, const LossConfig& config, double weight);

template <typename T>
struct PairGradients {
  std::vector<T> first;
  std::vector<T> second;
};

// Gradients of the weighted contrastive loss with respect to both
// embeddings. For a dissimilar pair at D = 0 the direction is undefined;
// zero gradients are returned and zero_distance_repulsions() is bumped.
template <typename T>
PairGradients<T> loss_gradients(std::span<const T> first, std::span<const T> second, bool same,
                                const LossConfig& config, double weight);

uint64_t zero_distance_repulsions();

struct PairTerm {
  double distance = 0.0;
  bool same = false;
  double weight = 1.0;
};

// Mean of per-pair losses. Throws kEmptyBatch for an empty batch.
double batch_objective(std::span<const PairTerm> pairs, const LossConfig& config);

}  // namespace fsed

#endif  // FSED_LOSS_H_
