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

#ifndef FSED_SYNTHESIS_H_
#define FSED_SYNTHESIS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsed/audio.h"
#include "fsed/dsp.h"
#include "fsed/rng.h"

namespace fsed {

// Isolated event sources grouped by class plus long background recordings.
// Event class ids run 1..C; id C+1 is the background-noise class.
struct SourceBank {
  int sample_rate = 16000;
  std::vector<std::string> class_names;
  std::vector<std::vector<AudioClip>> events;  // events[id - 1]
  std::vector<AudioClip> backgrounds;

  int event_class_count() const { return static_cast<int>(class_names.size()); }
  int background_label() const { return event_class_count() + 1; }
  size_t event_source_count() const;

  // Throws kUnknownClass.
  int class_id(std::string_view name) const;
  const std::string& class_name(int id) const;

  // Throws kInvalidConfig when a class has no clips, the background set is
  // empty, or clip sample rates differ from sample_rate.
  void validate() const;

  // Bank restricted to the named classes (ids are re-assigned in the given
  // order); backgrounds are shared.
  SourceBank subset(std::span<const std::string> names) const;
};

struct SamplerConfig {
  int window_frames = 100;
  int label_frames = 20;  // central frames the label refers to
  double ebr_min_db = 0.0;
  double ebr_max_db = 18.0;
  bool background_class = true;
  double background_weight = 2.0;
};

enum class PairCategory { kBackgroundBackground, kSameEvent, kBackgroundEvent, kDifferentEvent };

std::string_view category_name(PairCategory c);

struct LabeledSample {
  MelFeatures features;
  int label = 0;
};

struct Pair {
  LabeledSample first;
  LabeledSample second;
  bool same = false;  // l
  double weight = 1.0;  // w
  PairCategory category = PairCategory::kSameEvent;
};

// Gain g with RMS(g * event) / RMS(background) = 10^(ebr_db / 20).
// Throws kSilentSource if either input has zero RMS.
double ebr_gain(std::span<const float> event, std::span<const float> background, double ebr_db);

// Audio-level result of mixing one event into a background window.
struct MixedWindow {
  std::vector<float> mixture;
  std::vector<float> background;
  size_t event_begin = 0;  // event span inside the window, [begin, end)
  size_t event_end = 0;
  double gain = 0.0;
  double ebr_db = 0.0;
};

MixedWindow mix_event_window(Rng& rng, const SourceBank& bank, int class_id, const FeatureExtractor& fx,
                             const SamplerConfig& config);

// Event sample whose central label frames all overlap the mixed event.
// Throws kUnknownClass for ids outside 1..C.
LabeledSample make_event_sample(Rng& rng, const SourceBank& bank, int class_id, const FeatureExtractor& fx,
                                const SamplerConfig& config);

// Contiguous background-only window. Throws kTooShort if no background clip
// holds a full window.
LabeledSample make_background_sample(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx,
                                     const SamplerConfig& config);

// Builds a pair of the given category; l and w follow from the labels.
Pair make_pair(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx, const SamplerConfig& config,
               PairCategory category);

// With the background class enabled the four categories are equiprobable;
// otherwise only same/different event pairs are drawn, 0.5 each.
PairCategory draw_category(Rng& rng, bool background_class);

// Throws kInsufficientClasses if a different-event pair is drawn from a bank
// with fewer than two event classes.
Pair sample_pair(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx, const SamplerConfig& config);

struct EvalClipConfig {
  double duration_s = 30.0;
  double presence_rate = 0.5;
  std::vector<double> ebr_set_db = {-6.0, 0.0, 6.0};
  int distractors = 0;  // unannotated non-target events
};

struct EvalClip {
  AudioClip clip;  // annotations hold the target event, if present
  std::optional<double> ebr_db;
};

// At most one target event at a uniform position. Throws kTooShort when no
// background or the drawn event does not fit the requested duration.
EvalClip generate_eval_clip(Rng& rng, const SourceBank& bank, int target_class, const EvalClipConfig& config);

}  // namespace fsed

#endif  // FSED_SYNTHESIS_H_
