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

#ifndef FSED_TESTS_GRADCHECK_H_
#define FSED_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "fsed/loss.h"
#include "fsed/network.h"
#include "fsed/rng.h"
#include "oracles.h"

namespace oracle {

struct GradCheck {
  std::vector<double> relative_errors;
  double max_relative_error = 0.0;
  int rejected_kinks = 0;
};

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

// On/off state of every ReLU unit for one input. Identical patterns at
// theta - h, theta and theta + h mean the network is a single smooth piece
// over the central-difference interval.
inline void append_relu_pattern(const fsed::ActivationCache<double>& cache, std::vector<bool>& out) {
  auto add = [&](const fsed::RowMatrix<double>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i] > 0.0);
  };
  add(cache.stem_out);
  for (const auto& b : cache.blocks) {
    add(b.hidden);
    add(b.output);
  }
}

// Embeds every input; returns the embeddings and their joint ReLU pattern.
inline std::vector<fsed::Vector<double>> embed_all(const fsed::Network<double>& net,
                                                   const std::vector<const fsed::MelFeatures*>& inputs,
                                                   std::vector<bool>* pattern) {
  std::vector<fsed::Vector<double>> out;
  pattern->clear();
  for (const auto* x : inputs) {
    fsed::ActivationCache<double> cache;
    out.push_back(fsed::forward(net, *x, &cache));
    append_relu_pattern(cache, *pattern);
  }
  return out;
}

// Central differences at h on f(embeddings). Probes whose interval crosses
// a ReLU kink are counted and replaced by fresh probes.
template <typename Objective>
GradCheck probe_parameters(fsed::Network<double> net, const std::vector<const fsed::MelFeatures*>& inputs,
                           const std::vector<double>& analytic, Objective objective, int probes, fsed::Rng& rng,
                           double h) {
  std::vector<bool> base, plus_pattern, minus_pattern;
  embed_all(net, inputs, &base);
  GradCheck out;
  const size_t n = net.parameter_count();
  while (static_cast<int>(out.relative_errors.size()) < probes) {
    const size_t i = rng.index(n);
    const double original = net.params()[i];
    net.mutable_params()[i] = original + h;
    const double plus = objective(embed_all(net, inputs, &plus_pattern));
    net.mutable_params()[i] = original - h;
    const double minus = objective(embed_all(net, inputs, &minus_pattern));
    net.mutable_params()[i] = original;
    if (plus_pattern != base || minus_pattern != base) {
      ++out.rejected_kinks;
      continue;
    }
    const double err = relative_error(analytic[i], (plus - minus) / (2.0 * h));
    out.relative_errors.push_back(err);
    out.max_relative_error = std::max(out.max_relative_error, err);
  }
  return out;
}

// f(theta) = embedding(theta) . g
inline GradCheck gradient_check(const fsed::Network<double>& net, const fsed::MelFeatures& x,
                                const std::vector<double>& g, int probes, fsed::Rng& rng, double h = 1e-3) {
  fsed::ActivationCache<double> cache;
  fsed::forward(net, x, &cache);
  const std::vector<double> analytic = fsed::backward(net, cache, std::span<const double>(g));
  auto objective = [&](const std::vector<fsed::Vector<double>>& e) {
    double s = 0.0;
    for (int i = 0; i < e[0].size(); ++i) s += e[0][i] * g[static_cast<size_t>(i)];
    return s;
  };
  return probe_parameters(net, {&x}, analytic, objective, probes, rng, h);
}

// f(theta) = L(D(net(x1), net(x2)), l, w), the pair loss end to end.
inline GradCheck pair_loss_gradient_check(const fsed::Network<double>& net, const fsed::MelFeatures& x1,
                                          const fsed::MelFeatures& x2, bool same, const fsed::LossConfig& loss,
                                          double weight, int probes, fsed::Rng& rng, double h = 1e-3) {
  fsed::ActivationCache<double> c1, c2;
  const fsed::Vector<double> e1 = fsed::forward(net, x1, &c1);
  const fsed::Vector<double> e2 = fsed::forward(net, x2, &c2);
  const auto pair = fsed::loss_gradients(std::span<const double>(e1.data(), static_cast<size_t>(e1.size())),
                                         std::span<const double>(e2.data(), static_cast<size_t>(e2.size())), same,
                                         loss, weight);
  std::vector<double> analytic = fsed::backward(net, c1, std::span<const double>(pair.first));
  const std::vector<double> second = fsed::backward(net, c2, std::span<const double>(pair.second));
  for (size_t i = 0; i < analytic.size(); ++i) analytic[i] += second[i];
  auto objective = [&](const std::vector<fsed::Vector<double>>& e) {
    // Independent distance and loss formula.
    double d = 0.0;
    for (int i = 0; i < e[0].size(); ++i) d += (e[0][i] - e[1][i]) * (e[0][i] - e[1][i]);
    return contrastive(std::sqrt(d), same ? 1 : 0, loss.margin, weight);
  };
  return probe_parameters(net, {&x1, &x2}, analytic, objective, probes, rng, h);
}

}  // namespace oracle

#endif  // FSED_TESTS_GRADCHECK_H_
