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

#include "fsed/network.h"

#include <atomic>
#include <cmath>

#include "fsed/error.h"

namespace fsed {
namespace internal {
namespace {

int conv_out(int in, int kernel, int stride, int pad) { return (in + 2 * pad - kernel) / stride + 1; }

ConvSpec make_conv(int in_c, int out_c, int kernel, int stride, int in_h, int in_w) {
  ConvSpec c;
  c.in_channels = in_c;
  c.out_channels = out_c;
  c.kernel = kernel;
  c.stride = stride;
  c.pad = kernel / 2;
  c.in_h = in_h;
  c.in_w = in_w;
  c.out_h = conv_out(in_h, kernel, stride, c.pad);
  c.out_w = conv_out(in_w, kernel, stride, c.pad);
  return c;
}

void add_tensor(Layout& layout, const std::string& name, std::vector<int> shape, size_t* offset) {
  size_t size = 1;
  for (int d : shape) size *= static_cast<size_t>(d);
  layout.tensors.push_back({name, std::move(shape), layout.total, size});
  *offset = layout.total;
  layout.total += size;
}

void add_conv(Layout& layout, const std::string& name, ConvSpec& conv) {
  add_tensor(layout, name + ".weight", {conv.out_channels, conv.in_channels, conv.kernel, conv.kernel},
             &conv.weight_offset);
  add_tensor(layout, name + ".bias", {conv.out_channels}, &conv.bias_offset);
}

}  // namespace

Layout build_layout(const NetworkConfig& config) {
  validate(config);
  Layout layout;
  layout.stem = make_conv(1, config.stem_channels, 3, 1, config.mel_channels, config.frames);
  add_conv(layout, "stem", layout.stem);
  int channels = config.stem_channels;
  int h = layout.stem.out_h, w = layout.stem.out_w;
  for (size_t i = 0; i < config.blocks.size(); ++i) {
    const BlockSpec& spec = config.blocks[i];
    BlockLayout block;
    block.conv1 = make_conv(channels, spec.channels, 3, spec.stride, h, w);
    block.conv2 = make_conv(spec.channels, spec.channels, 3, 1, block.conv1.out_h, block.conv1.out_w);
    const std::string prefix = "block" + std::to_string(i + 1);
    add_conv(layout, prefix + ".conv1", block.conv1);
    add_conv(layout, prefix + ".conv2", block.conv2);
    block.has_projection = spec.channels != channels || spec.stride != 1;
    if (block.has_projection) {
      block.projection = make_conv(channels, spec.channels, 1, spec.stride, h, w);
      add_conv(layout, prefix + ".projection", block.projection);
    }
    channels = spec.channels;
    h = block.conv2.out_h;
    w = block.conv2.out_w;
    layout.blocks.push_back(block);
  }
  layout.pooled_channels = channels;
  add_tensor(layout, "fc.weight", {config.embed_dim, channels}, &layout.fc_weight_offset);
  add_tensor(layout, "fc.bias", {config.embed_dim}, &layout.fc_bias_offset);
  return layout;
}

}  // namespace internal

void validate(const NetworkConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (config.mel_channels < 1 || config.frames < 1) fail("input shape must be positive");
  if (config.stem_channels < 1) fail("stem_channels must be positive");
  if (config.blocks.empty()) fail("network needs at least one residual block");
  if (config.embed_dim < 1) fail("embed_dim must be positive");
  int h = config.mel_channels, w = config.frames;
  for (const auto& b : config.blocks) {
    if (b.channels < 1 || b.stride < 1) fail("block channels and stride must be positive");
    h = (h - 1) / b.stride + 1;
    w = (w - 1) / b.stride + 1;
  }
  if (h < 1 || w < 1) fail("input too small for the block stack");
}

namespace {

template <typename T>
inline constexpr T kStandardizeEpsilon = T(1e-6);

std::atomic<uint64_t> g_generation{1};

uint64_t next_generation() { return g_generation.fetch_add(1, std::memory_order_relaxed); }

using internal::ConvSpec;

template <typename T>
using ConstMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMatrix<T>>;

// input: C x (H*W). Returns (C*k*k) x (Ho*Wo).
template <typename T>
RowMatrix<T> im2col(const ConvSpec& c, const RowMatrix<T>& input) {
  const int k = c.kernel;
  RowMatrix<T> cols(c.in_channels * k * k, c.out_h * c.out_w);
  for (int ch = 0; ch < c.in_channels; ++ch) {
    const T* src = input.data() + static_cast<size_t>(ch) * c.in_h * c.in_w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        T* dst = cols.data() + static_cast<size_t>((ch * k + ki) * k + kj) * c.out_h * c.out_w;
        for (int oh = 0; oh < c.out_h; ++oh) {
          const int ih = oh * c.stride - c.pad + ki;
          T* row = dst + static_cast<size_t>(oh) * c.out_w;
          if (ih < 0 || ih >= c.in_h) {
            std::fill(row, row + c.out_w, T(0));
            continue;
          }
          const T* line = src + static_cast<size_t>(ih) * c.in_w;
          for (int ow = 0; ow < c.out_w; ++ow) {
            const int iw = ow * c.stride - c.pad + kj;
            row[ow] = (iw >= 0 && iw < c.in_w) ? line[iw] : T(0);
          }
        }
      }
    }
  }
  return cols;
}

// Adds the column gradient back onto an input-shaped gradient.
template <typename T>
void col2im_add(const ConvSpec& c, const RowMatrix<T>& dcols, RowMatrix<T>& dinput) {
  const int k = c.kernel;
  for (int ch = 0; ch < c.in_channels; ++ch) {
    T* dst = dinput.data() + static_cast<size_t>(ch) * c.in_h * c.in_w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const T* src = dcols.data() + static_cast<size_t>((ch * k + ki) * k + kj) * c.out_h * c.out_w;
        for (int oh = 0; oh < c.out_h; ++oh) {
          const int ih = oh * c.stride - c.pad + ki;
          if (ih < 0 || ih >= c.in_h) continue;
          T* line = dst + static_cast<size_t>(ih) * c.in_w;
          const T* row = src + static_cast<size_t>(oh) * c.out_w;
          for (int ow = 0; ow < c.out_w; ++ow) {
            const int iw = ow * c.stride - c.pad + kj;
            if (iw >= 0 && iw < c.in_w) line[iw] += row[ow];
          }
        }
      }
    }
  }
}

template <typename T>
ConstMap<T> weight_map(const ConvSpec& c, std::span<const T> p) {
  return ConstMap<T>(p.data() + c.weight_offset, c.out_channels, c.in_channels * c.kernel * c.kernel);
}

template <typename T>
RowMatrix<T> conv_apply(const ConvSpec& c, std::span<const T> p, const RowMatrix<T>& cols) {
  RowMatrix<T> out = weight_map(c, p) * cols;
  const Eigen::Map<const Vector<T>> bias(p.data() + c.bias_offset, c.out_channels);
  out.colwise() += bias;
  return out;
}

// Accumulates weight/bias gradients and returns d(cols).
template <typename T>
RowMatrix<T> conv_backward(const ConvSpec& c, std::span<const T> p, const RowMatrix<T>& cols,
                           const RowMatrix<T>& dout, std::span<T> grads, bool need_input_grad) {
  MutMap<T> dw(grads.data() + c.weight_offset, c.out_channels, c.in_channels * c.kernel * c.kernel);
  dw.noalias() += dout * cols.transpose();
  Eigen::Map<Vector<T>> db(grads.data() + c.bias_offset, c.out_channels);
  db += dout.rowwise().sum();
  if (!need_input_grad) return {};
  return weight_map(c, p).transpose() * dout;
}

template <typename T>
void relu_inplace(RowMatrix<T>& m) {
  m = m.cwiseMax(T(0));
}

// Zeroes gradient entries where the (post-ReLU) activation is zero.
template <typename T>
void relu_mask(const RowMatrix<T>& activation, RowMatrix<T>& grad) {
  grad = (activation.array() > T(0)).select(grad, T(0));
}

}  // namespace

template <typename T>
Network<T>::Network(const NetworkConfig& config)
    : config_(config),
      layout_(internal::build_layout(config)),
      params_(layout_.total, T(0)),
      generation_(next_generation()) {}

template <typename T>
std::span<T> Network<T>::mutable_params() {
  generation_ = next_generation();
  return params_;
}

template <typename T>
Network<T> init_network(const NetworkConfig& config, Rng& rng) {
  Network<T> net(config);
  auto p = net.mutable_params();
  for (const auto& t : net.tensors()) {
    if (t.shape.size() < 2) continue;  // biases stay zero
    size_t fan_in = 1;
    for (size_t d = 1; d < t.shape.size(); ++d) fan_in *= static_cast<size_t>(t.shape[d]);
    // The dense head is linear, so it gets unit gain instead of the ReLU gain.
    const double gain = t.name.starts_with("fc.") ? 1.0 : 2.0;
    const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
    for (size_t i = 0; i < t.size; ++i) p[t.offset + i] = static_cast<T>(rng.normal(0.0, stddev));
  }
  return net;
}

template <typename T>
Vector<T> forward(const Network<T>& net, const MelFeatures& x, ActivationCache<T>* cache) {
  const auto& cfg = net.config();
  if (x.channels() != cfg.mel_channels || x.frames() != cfg.frames) {
    throw Error(ErrorCode::kShapeMismatch, "network expects " + std::to_string(cfg.mel_channels) + "x" +
                                               std::to_string(cfg.frames) + " features, got " +
                                               std::to_string(x.channels()) + "x" +
                                               std::to_string(x.frames()));
  }
  const auto& layout = net.layout();
  const std::span<const T> p = net.params();

  RowMatrix<T> input =
      Eigen::Map<const FeatureMatrix>(x.values.data(), 1, x.values.size()).template cast<T>();
  if (cfg.standardize_input) {
    const T mean = input.mean();
    const T var = (input.array() - mean).square().mean();
    input = ((input.array() - mean) / std::sqrt(var + kStandardizeEpsilon<T>)).matrix();
  }

  RowMatrix<T> stem_cols = im2col(layout.stem, input);
  RowMatrix<T> act = conv_apply(layout.stem, p, stem_cols);
  relu_inplace(act);
  if (cache) {
    cache->generation = net.generation();
    cache->frames = cfg.frames;
    cache->stem_cols = std::move(stem_cols);
    cache->stem_out = act;
    cache->blocks.resize(layout.blocks.size());
  }

  for (size_t b = 0; b < layout.blocks.size(); ++b) {
    const auto& bl = layout.blocks[b];
    RowMatrix<T> cols1 = im2col(bl.conv1, act);
    RowMatrix<T> hidden = conv_apply(bl.conv1, p, cols1);
    relu_inplace(hidden);
    RowMatrix<T> cols2 = im2col(bl.conv2, hidden);
    RowMatrix<T> out = conv_apply(bl.conv2, p, cols2);
    RowMatrix<T> proj_cols;
    if (bl.has_projection) {
      proj_cols = im2col(bl.projection, act);
      out += conv_apply(bl.projection, p, proj_cols);
    } else {
      out += act;
    }
    relu_inplace(out);
    if (cache) {
      auto& bc = cache->blocks[b];
      bc.conv1_cols = std::move(cols1);
      bc.hidden = std::move(hidden);
      bc.conv2_cols = std::move(cols2);
      bc.projection_cols = std::move(proj_cols);
      bc.output = out;
    }
    act = std::move(out);
  }

  Vector<T> pooled = act.rowwise().mean();
  const ConstMap<T> fc_w(p.data() + layout.fc_weight_offset, cfg.embed_dim, layout.pooled_channels);
  const Eigen::Map<const Vector<T>> fc_b(p.data() + layout.fc_bias_offset, cfg.embed_dim);
  Vector<T> embedding = fc_w * pooled + fc_b;
  if (cache) cache->pooled = std::move(pooled);
  return embedding;
}

template <typename T>
void backward_accumulate(const Network<T>& net, const ActivationCache<T>& cache,
                         std::span<const T> grad_embedding, std::span<T> grads) {
  const auto& cfg = net.config();
  const auto& layout = net.layout();
  if (cache.generation != net.generation() || cache.blocks.size() != layout.blocks.size() ||
      cache.pooled.size() != layout.pooled_channels) {
    throw Error(ErrorCode::kCacheMismatch, "activation cache does not belong to these parameters");
  }
  if (grad_embedding.size() != static_cast<size_t>(cfg.embed_dim) || grads.size() != net.parameter_count()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient buffer sizes do not match the network");
  }
  const std::span<const T> p = net.params();
  const Eigen::Map<const Vector<T>> de(grad_embedding.data(), cfg.embed_dim);

  MutMap<T> dfc_w(grads.data() + layout.fc_weight_offset, cfg.embed_dim, layout.pooled_channels);
  dfc_w.noalias() += de * cache.pooled.transpose();
  Eigen::Map<Vector<T>>(grads.data() + layout.fc_bias_offset, cfg.embed_dim) += de;
  const ConstMap<T> fc_w(p.data() + layout.fc_weight_offset, cfg.embed_dim, layout.pooled_channels);
  const Vector<T> dpooled = fc_w.transpose() * de;

  const RowMatrix<T>& last = cache.blocks.back().output;
  const T inv_area = T(1) / static_cast<T>(last.cols());
  RowMatrix<T> dact = (dpooled * inv_area).replicate(1, last.cols());

  for (size_t bi = layout.blocks.size(); bi-- > 0;) {
    const auto& bl = layout.blocks[bi];
    const auto& bc = cache.blocks[bi];
    relu_mask(bc.output, dact);  // d(sum before ReLU)

    const RowMatrix<T>& block_input = bi == 0 ? cache.stem_out : cache.blocks[bi - 1].output;
    RowMatrix<T> dinput = RowMatrix<T>::Zero(block_input.rows(), block_input.cols());
    if (bl.has_projection) {
      const RowMatrix<T> dcols = conv_backward(bl.projection, p, bc.projection_cols, dact, grads, true);
      col2im_add(bl.projection, dcols, dinput);
    } else {
      dinput += dact;
    }

    RowMatrix<T> dhidden = RowMatrix<T>::Zero(bc.hidden.rows(), bc.hidden.cols());
    {
      const RowMatrix<T> dcols = conv_backward(bl.conv2, p, bc.conv2_cols, dact, grads, true);
      col2im_add(bl.conv2, dcols, dhidden);
    }
    relu_mask(bc.hidden, dhidden);
    {
      const RowMatrix<T> dcols = conv_backward(bl.conv1, p, bc.conv1_cols, dhidden, grads, true);
      col2im_add(bl.conv1, dcols, dinput);
    }
    dact = std::move(dinput);
  }

  relu_mask(cache.stem_out, dact);
  conv_backward(layout.stem, p, cache.stem_cols, dact, grads, false);
}

template class Network<float>;
template class Network<double>;
template Network<float> init_network<float>(const NetworkConfig&, Rng&);
template Network<double> init_network<double>(const NetworkConfig&, Rng&);
template Vector<float> forward<float>(const Network<float>&, const MelFeatures&, ActivationCache<float>*);
template Vector<double> forward<double>(const Network<double>&, const MelFeatures&, ActivationCache<double>*);
template void backward_accumulate<float>(const Network<float>&, const ActivationCache<float>&,
                                         std::span<const float>, std::span<float>);
template void backward_accumulate<double>(const Network<double>&, const ActivationCache<double>&,
                                          std::span<const double>, std::span<double>);

}  // namespace fsed
