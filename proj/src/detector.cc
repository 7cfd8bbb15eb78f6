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

#include "fsed/detector.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsed/error.h"
#include "fsed/loss.h"
#include "fsed/parallel.h"

namespace fsed {

MelFeatures support_window(const MelFeatures& clip_features, double onset_s, int window_frames) {
  const int frames = clip_features.frames();
  if (frames < window_frames) {
    throw Error(ErrorCode::kTooShort, "support clip has " + std::to_string(frames) + " frames, window needs " +
                                          std::to_string(window_frames));
  }
  const int center = static_cast<int>(std::lround(onset_s / clip_features.frame_hop_s));
  const int start = std::clamp(center - window_frames / 2, 0, frames - window_frames);
  return clip_features.window(start, window_frames);
}

Prototype compute_prototype(const Network<float>& net, const SupportSet& support, int workers) {
  if (support.examples.empty()) throw Error(ErrorCode::kEmptySupport, "support set has no examples");
  std::vector<Vector<float>> embeddings(support.examples.size());
  parallel_for(support.examples.size(), workers,
               [&](size_t i) { embeddings[i] = forward(net, support.examples[i]); });
  Prototype proto;
  proto.shots = support.shots();
  const size_t dim = static_cast<size_t>(embeddings.front().size());
  std::vector<double> sum(dim, 0.0);
  for (const auto& e : embeddings) {
    for (size_t d = 0; d < dim; ++d) sum[d] += e[static_cast<Eigen::Index>(d)];
  }
  proto.mean.resize(dim);
  for (size_t d = 0; d < dim; ++d) proto.mean[d] = static_cast<float>(sum[d] / static_cast<double>(proto.shots));
  return proto;
}

std::vector<std::vector<float>> embed_windows(const Network<float>& net, const MelFeatures& query,
                                              const InferenceConfig& config) {
  if (config.window_frames < 1 || config.window_hop_frames < 1) {
    throw Error(ErrorCode::kInvalidConfig, "window and hop must be positive");
  }
  if (query.frames() < config.window_frames) {
    throw Error(ErrorCode::kTooShort, "query has " + std::to_string(query.frames()) + " frames, window needs " +
                                          std::to_string(config.window_frames));
  }
  const size_t count = static_cast<size_t>((query.frames() - config.window_frames) / config.window_hop_frames) + 1;
  std::vector<std::vector<float>> out(count);
  parallel_for(count, config.workers, [&](size_t n) {
    const Vector<float> e =
        forward(net, query.window(static_cast<int>(n) * config.window_hop_frames, config.window_frames));
    out[n].assign(e.data(), e.data() + e.size());
  });
  return out;
}

DistanceSequence distances_to_prototype(const Prototype& proto, std::span<const std::vector<float>> embeddings,
                                        double frame_hop_s, const InferenceConfig& config) {
  DistanceSequence ds;
  ds.window_hop_frames = config.window_hop_frames;
  ds.frame_hop_s = frame_hop_s;
  ds.origin_s = (config.window_frames / 2) * frame_hop_s;
  ds.values.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    ds.values.push_back(pair_distance<float>(proto.mean, e));
  }
  return ds;
}

DistanceSequence distance_sequence(const Network<float>& net, const Prototype& proto, const MelFeatures& query,
                                   const InferenceConfig& config) {
  const auto embeddings = embed_windows(net, query, config);
  return distances_to_prototype(proto, embeddings, query.frame_hop_s, config);
}

std::vector<DetectionEvent> detect_events(const DistanceSequence& ds, const DetectionConfig& config,
                                          const std::string& label) {
  std::vector<DetectionEvent> events;
  const size_t n = ds.values.size();
  size_t i = 0;
  while (i < n) {
    if (!(ds.values[i] < config.sigma)) {
      ++i;
      continue;
    }
    size_t first = i, last = i;
    double best = ds.values[i];
    size_t j = i + 1;
    while (j < n) {
      if (ds.values[j] < config.sigma) {
        last = j;
        best = std::min(best, ds.values[j]);
        ++j;
      } else if (static_cast<int>(j - last) <= config.min_gap_windows) {
        ++j;  // tolerated gap; decided once the next positive shows up
      } else {
        break;
      }
    }
    if (static_cast<int>(last - first + 1) >= config.min_len_windows) {
      events.push_back({ds.time_at(first), ds.time_at(last) + ds.hop_s(), label, best});
    }
    i = last + 1;
  }
  return events;
}

std::vector<double> threshold_grid(std::span<const DevClip> clips, int grid_points) {
  std::vector<double> minima;
  for (const auto& c : clips) {
    if (!c.distances.values.empty()) {
      minima.push_back(*std::min_element(c.distances.values.begin(), c.distances.values.end()));
    }
  }
  if (minima.empty() || grid_points < 1) return {};
  std::sort(minima.begin(), minima.end());
  const size_t n = minima.size();
  std::vector<double> grid;
  for (int j = 0; j < grid_points; ++j) {
    const double pos = grid_points == 1 ? 0.0 : static_cast<double>(j) * static_cast<double>(n - 1) / (grid_points - 1);
    const size_t i = std::min(n - 1, static_cast<size_t>(std::floor(pos)));
    const auto next = std::upper_bound(minima.begin(), minima.end(), minima[i]);
    double sigma;
    if (next != minima.end()) {
      sigma = 0.5 * (minima[i] + *next);
    } else {
      sigma = minima[i] + std::max(1e-9, 1e-6 * std::abs(minima[i]));
    }
    grid.push_back(sigma);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ThresholdResult tune_threshold(std::span<const DevClip> clips, const std::string& label, const TuneConfig& config) {
  if (clips.empty()) throw Error(ErrorCode::kEmptyDevSet, "no development clips for class '" + label + "'");
  ThresholdResult result;
  result.grid = threshold_grid(clips, config.grid_points);
  if (result.grid.empty()) throw Error(ErrorCode::kEmptyDevSet, "development clips hold no windows");

  std::vector<Event> refs;
  for (const auto& c : clips) {
    for (const auto& r : c.references) {
      if (r.label != label) continue;
      Event e = r;
      e.clip_id = c.clip_id;
      refs.push_back(std::move(e));
    }
  }
  result.f1 = -1.0;
  for (double sigma : result.grid) {  // ascending, so ties keep the smaller sigma
    std::vector<Event> dets;
    for (const auto& c : clips) {
      for (const auto& d : detect_events(c.distances, {sigma, config.min_gap_windows, config.min_len_windows}, label)) {
        dets.push_back({c.clip_id, d.onset_s, d.offset_s, label, d.score});
      }
    }
    const EvalReport report = evaluate(refs, dets, config.collar_s);
    const auto it = report.per_class.find(label);
    const double f1 = it == report.per_class.end() ? 0.0 : it->second.f1;
    if (f1 > result.f1) {
      result.f1 = f1;
      result.sigma = sigma;
    }
  }
  return result;
}

std::map<std::string, ThresholdResult> tune_thresholds(const std::map<std::string, std::vector<DevClip>>& per_class,
                                                       const TuneConfig& config) {
  if (per_class.empty()) throw Error(ErrorCode::kEmptyDevSet, "no classes to tune");
  std::map<std::string, ThresholdResult> out;
  for (const auto& [label, clips] : per_class) out[label] = tune_threshold(clips, label, config);
  return out;
}

}  // namespace fsed
