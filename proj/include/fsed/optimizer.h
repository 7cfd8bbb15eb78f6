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

#ifndef FSED_OPTIMIZER_H_
#define FSED_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fsed/network.h"

namespace fsed {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<T> m;
  std::vector<T> v;
  int64_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, size_t parameter_count)
      : config(cfg), m(parameter_count, T(0)), v(parameter_count, T(0)) {}
};

// Bias-corrected Adam update. Throws kNonFiniteGradient (leaving params and
// state untouched) if any gradient is NaN or infinite, and kShapeMismatch if
// sizes disagree.
template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, AdamState<T>& state);

template <typename T>
void adam_step(Network<T>& net, std::span<const T> grads, AdamState<T>& state) {
  adam_update(net.mutable_params(), grads, state);
}

}  // namespace fsed

#endif  // FSED_OPTIMIZER_H_
