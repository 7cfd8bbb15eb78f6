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

#ifndef FSED_RNG_H_
#define FSED_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace fsed {

// Seedable, splittable random source. The engine is std::mt19937_64; the
// variate transforms are implemented here rather than with <random>
// distributions so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0);

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be positive.
  size_t index(size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent child stream keyed by `stream`. Depends only on this
  // generator's key, not on how many values have been drawn from it.
  Rng split(uint64_t stream) const;

  uint64_t key() const { return key_; }

 private:
  uint64_t key_;
  std::mt19937_64 engine_;
};

uint64_t splitmix64(uint64_t x);

}  // namespace fsed

#endif  // FSED_RNG_H_
