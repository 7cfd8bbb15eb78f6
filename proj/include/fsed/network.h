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

#ifndef FSED_NETWORK_H_
#define FSED_NETWORK_H_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsed/dsp.h"
#include "fsed/rng.h"

namespace fsed {

struct BlockSpec {
  int channels = 16;
  int stride = 2;

  bool operator==(const BlockSpec&) const = default;
};

// Residual CNN: 3x3 stem conv, a stack of residual blocks (two 3x3 convs,
// identity or 1x1 projection skip), global average pool, dense projection to
// the embedding. No learned normalization layers; the input window may be
// standardized to zero mean and unit variance before the stem.
struct NetworkConfig {
  int mel_channels = 40;
  int frames = 100;
  int stem_channels = 8;
  std::vector<BlockSpec> blocks = {{16, 2}, {32, 2}, {56, 2}};
  int embed_dim = 128;
  uint64_t seed = 0;
  bool standardize_input = true;

  bool operator==(const NetworkConfig&) const = default;
};

// Throws Error(kInvalidConfig).
void validate(const NetworkConfig& config);

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  size_t offset = 0;
  size_t size = 0;
};

namespace internal {

struct ConvSpec {
  int in_channels = 0, out_channels = 0;
  int kernel = 3, stride = 1, pad = 1;
  int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
  size_t weight_offset = 0, bias_offset = 0;
};

struct BlockLayout {
  ConvSpec conv1, conv2;
  bool has_projection = false;
  ConvSpec projection;
};

struct Layout {
  ConvSpec stem;
  std::vector<BlockLayout> blocks;
  int pooled_channels = 0;
  size_t fc_weight_offset = 0, fc_bias_offset = 0;
  std::vector<TensorInfo> tensors;
  size_t total = 0;
};

Layout build_layout(const NetworkConfig& config);

}  // namespace internal

// Parameters of the embedding network stored as one flat vector; `tensors()`
// describes the named slices in declaration order.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return layout_.tensors; }
  size_t parameter_count() const { return params_.size(); }
  std::span<const T> params() const { return params_; }
  // Any mutable access invalidates activation caches taken earlier.
  std::span<T> mutable_params();
  uint64_t generation() const { return generation_; }

  template <typename U>
  Network<U> cast() const {
    Network<U> out(config_);
    auto dst = out.mutable_params();
    for (size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  const internal::Layout& layout() const { return layout_; }

 private:
  NetworkConfig config_;
  internal::Layout layout_;
  std::vector<T> params_;
  uint64_t generation_;
};

// He-normal weights scaled by fan-in, zero biases.
template <typename T>
Network<T> init_network(const NetworkConfig& config, Rng& rng);

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Intermediate values kept by forward() for backward().
template <typename T>
struct ActivationCache {
  struct Block {
    RowMatrix<T> conv1_cols, hidden, conv2_cols, projection_cols, output;
  };
  uint64_t generation = 0;
  int frames = 0;
  RowMatrix<T> stem_cols, stem_out;
  std::vector<Block> blocks;
  Vector<T> pooled;
};

// Throws kShapeMismatch when x is not mel_channels x frames.
template <typename T>
Vector<T> forward(const Network<T>& net, const MelFeatures& x, ActivationCache<T>* cache = nullptr);

// Accumulates d(embedding . grad_embedding)/d(params) into `grads`, which
// must have parameter_count() entries. Throws kCacheMismatch if the cache
// was produced with different parameters.
template <typename T>
void backward_accumulate(const Network<T>& net, const ActivationCache<T>& cache,
                         std::span<const T> grad_embedding, std::span<T> grads);

template <typename T>
std::vector<T> backward(const Network<T>& net, const ActivationCache<T>& cache,
                        std::span<const T> grad_embedding) {
  std::vector<T> grads(net.parameter_count(), T(0));
  backward_accumulate(net, cache, grad_embedding, std::span<T>(grads));
  return grads;
}

}  // namespace fsed

#endif  // FSED_NETWORK_H_
