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

#ifndef FSED_DETECTOR_H_
#define FSED_DETECTOR_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fsed/dsp.h"
#include "fsed/evaluator.h"
#include "fsed/network.h"

namespace fsed {

struct SupportSet {
  std::vector<MelFeatures> examples;
  std::string label;

  int shots() const { return static_cast<int>(examples.size()); }
};

// `window_frames` frames centered on the frame nearest onset_s, shifted
// inward when the onset sits closer than half a window to a clip edge.
// Throws kTooShort if the clip holds fewer frames than one window.
MelFeatures support_window(const MelFeatures& clip_features, double onset_s, int window_frames = 100);

struct Prototype {
  std::vector<float> mean;
  int shots = 0;
};

// Mean embedding of the support examples. Throws kEmptySupport.
Prototype compute_prototype(const Network<float>& net, const SupportSet& support, int workers = 1);

struct InferenceConfig {
  int window_frames = 100;
  int window_hop_frames = 20;
  int workers = 1;
};

// Window n covers frames [n*hop, n*hop + window); its timestamp is its
// center, origin_s + n * hop_s().
struct DistanceSequence {
  std::vector<double> values;
  int window_hop_frames = 20;
  double frame_hop_s = 0.010;
  double origin_s = 0.5;

  double hop_s() const { return window_hop_frames * frame_hop_s; }
  double time_at(size_t n) const { return origin_s + static_cast<double>(n) * hop_s(); }
};

// Embeddings of every query window, floor((T - window) / hop) + 1 of them.
// Throws kTooShort when T < window_frames.
std::vector<std::vector<float>> embed_windows(const Network<float>& net, const MelFeatures& query,
                                              const InferenceConfig& config = {});

DistanceSequence distances_to_prototype(const Prototype& proto, std::span<const std::vector<float>> embeddings,
                                        double frame_hop_s, const InferenceConfig& config = {});

DistanceSequence distance_sequence(const Network<float>& net, const Prototype& proto, const MelFeatures& query,
                                   const InferenceConfig& config = {});

struct DetectionEvent {
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string label;
  double score = 0.0;  // minimum distance in the run

  double confidence() const { return -score; }
};

struct DetectionConfig {
  double sigma = 1.0;
  int min_gap_windows = 1;
  int min_len_windows = 1;
};

// Windows with D < sigma are positive. Positive windows separated by at most
// min_gap_windows negatives merge into one run; runs spanning fewer than
// min_len_windows windows are dropped. Onset is the first positive window's
// time, offset one window hop past the last one.
std::vector<DetectionEvent> detect_events(const DistanceSequence& ds, const DetectionConfig& config,
                                          const std::string& label = {});

struct DevClip {
  std::string clip_id;
  DistanceSequence distances;
  std::vector<Event> references;  // events of the class being tuned
};

struct TuneConfig {
  int grid_points = 101;
  int min_gap_windows = 1;
  int min_len_windows = 1;
  double collar_s = 0.5;
};

struct ThresholdResult {
  double sigma = 0.0;
  double f1 = 0.0;
  std::vector<double> grid;
};

// Candidate thresholds sit at evenly spaced quantiles of the per-clip
// minimum distances, each placed halfway to the next larger minimum so it
// separates two clips. Returns the candidate with the best event F1,
// preferring the smaller sigma on ties. Throws kEmptyDevSet.
std::vector<double> threshold_grid(std::span<const DevClip> clips, int grid_points);
ThresholdResult tune_threshold(std::span<const DevClip> clips, const std::string& label,
                               const TuneConfig& config = {});

std::map<std::string, ThresholdResult> tune_thresholds(const std::map<std::string, std::vector<DevClip>>& per_class,
                                                       const TuneConfig& config = {});

}  // namespace fsed

#endif  // FSED_DETECTOR_H_
