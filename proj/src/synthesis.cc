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

#include "fsed/synthesis.h"

#include <algorithm>
#include <cmath>

#include "fsed/error.h"

namespace fsed {
namespace {

// Picks uniformly among background clips that hold at least `length`
// samples.
const AudioClip& pick_background(Rng& rng, const SourceBank& bank, size_t length) {
  std::vector<size_t> eligible;
  for (size_t i = 0; i < bank.backgrounds.size(); ++i) {
    if (bank.backgrounds[i].samples.size() >= length) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::kTooShort, "no background clip holds " + std::to_string(length) + " samples");
  }
  return bank.backgrounds[eligible[rng.index(eligible.size())]];
}

std::span<const float> random_segment(Rng& rng, const AudioClip& clip, size_t length) {
  const size_t offset = rng.index(clip.samples.size() - length + 1);
  return std::span<const float>(clip.samples).subspan(offset, length);
}

void check_class(const SourceBank& bank, int class_id) {
  if (class_id < 1 || class_id > bank.event_class_count()) {
    throw Error(ErrorCode::kUnknownClass, "event class id " + std::to_string(class_id) + " not in 1.." +
                                              std::to_string(bank.event_class_count()));
  }
}

int64_t draw_int(Rng& rng, int64_t lo, int64_t hi) {  // inclusive
  return lo + static_cast<int64_t>(rng.index(static_cast<size_t>(hi - lo + 1)));
}

}  // namespace

size_t SourceBank::event_source_count() const {
  size_t n = 0;
  for (const auto& c : events) n += c.size();
  return n;
}

int SourceBank::class_id(std::string_view name) const {
  for (size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return static_cast<int>(i) + 1;
  }
  throw Error(ErrorCode::kUnknownClass, "unknown event class '" + std::string(name) + "'");
}

const std::string& SourceBank::class_name(int id) const {
  static const std::string kBackground = "background";
  if (id == background_label()) return kBackground;
  if (id < 1 || id > event_class_count()) {
    throw Error(ErrorCode::kUnknownClass, "event class id " + std::to_string(id));
  }
  return class_names[static_cast<size_t>(id - 1)];
}

void SourceBank::validate() const {
  if (events.size() != class_names.size()) {
    throw Error(ErrorCode::kInvalidConfig, "class name and event list counts differ");
  }
  for (size_t i = 0; i < events.size(); ++i) {
    if (events[i].empty()) throw Error(ErrorCode::kInvalidConfig, "class '" + class_names[i] + "' has no clips");
    for (const auto& c : events[i]) {
      if (c.sample_rate != sample_rate || c.samples.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "class '" + class_names[i] + "' has an empty or mis-rated clip");
      }
    }
  }
  if (backgrounds.empty()) throw Error(ErrorCode::kInvalidConfig, "background set is empty");
  for (const auto& b : backgrounds) {
    if (b.sample_rate != sample_rate) throw Error(ErrorCode::kInvalidConfig, "background clip has wrong rate");
  }
}

SourceBank SourceBank::subset(std::span<const std::string> names) const {
  SourceBank out;
  out.sample_rate = sample_rate;
  out.backgrounds = backgrounds;
  for (const auto& name : names) {
    const int id = class_id(name);
    out.class_names.push_back(name);
    out.events.push_back(events[static_cast<size_t>(id - 1)]);
  }
  return out;
}

std::string_view category_name(PairCategory c) {
  switch (c) {
    case PairCategory::kBackgroundBackground: return "BG-BG";
    case PairCategory::kSameEvent: return "EVT-EVT-same";
    case PairCategory::kBackgroundEvent: return "BG-EVT";
    case PairCategory::kDifferentEvent: return "EVT-EVT-diff";
  }
  return "?";
}

double ebr_gain(std::span<const float> event, std::span<const float> background, double ebr_db) {
  const double event_rms = rms(event);
  const double background_rms = rms(background);
  if (!(event_rms > 0.0)) throw Error(ErrorCode::kSilentSource, "event source is silent");
  if (!(background_rms > 0.0)) throw Error(ErrorCode::kSilentSource, "background segment is silent");
  return std::pow(10.0, ebr_db / 20.0) * background_rms / event_rms;
}

MixedWindow mix_event_window(Rng& rng, const SourceBank& bank, int class_id, const FeatureExtractor& fx,
                             const SamplerConfig& config) {
  check_class(bank, class_id);
  if (config.label_frames < 1 || config.label_frames > config.window_frames) {
    throw Error(ErrorCode::kInvalidConfig, "label frames must lie within the window");
  }
  const size_t window = static_cast<size_t>(fx.samples_for_frames(config.window_frames));
  const auto& sources = bank.events[static_cast<size_t>(class_id - 1)];
  const AudioClip& event = sources[rng.index(sources.size())];
  const int64_t len = static_cast<int64_t>(event.samples.size());

  // Central label frames c0..c1 span the audio region [r0, r1).
  const int c0 = (config.window_frames - config.label_frames) / 2;
  const int c1 = c0 + config.label_frames - 1;
  const int64_t r0 = static_cast<int64_t>(c0) * fx.hop();
  const int64_t r1 = static_cast<int64_t>(c1) * fx.hop() + fx.frame_len();
  int64_t lo, hi;  // admissible event start positions inside the window
  if (len >= r1 - r0) {
    lo = r1 - len;  // event covers the whole central region
    hi = r0;
  } else {
    lo = static_cast<int64_t>(c1) * fx.hop() - len + 1;  // touches every central frame
    hi = r0 + fx.frame_len() - 1;
    if (lo > hi) lo = hi = (r0 + r1 - len) / 2;
  }
  const int64_t start = draw_int(rng, lo, hi);

  MixedWindow out;
  const AudioClip& bg_clip = pick_background(rng, bank, window);
  const auto bg = random_segment(rng, bg_clip, window);
  out.background.assign(bg.begin(), bg.end());
  out.mixture = out.background;
  out.event_begin = static_cast<size_t>(std::max<int64_t>(start, 0));
  out.event_end = static_cast<size_t>(std::min<int64_t>(start + len, static_cast<int64_t>(window)));
  const size_t src_begin = static_cast<size_t>(static_cast<int64_t>(out.event_begin) - start);
  const size_t span = out.event_end - out.event_begin;

  out.ebr_db = rng.uniform(config.ebr_min_db, config.ebr_max_db);
  const auto event_part = std::span<const float>(event.samples).subspan(src_begin, span);
  out.gain = ebr_gain(event_part, std::span<const float>(out.background).subspan(out.event_begin, span),
                      out.ebr_db);
  const float g = static_cast<float>(out.gain);
  for (size_t i = 0; i < span; ++i) out.mixture[out.event_begin + i] += g * event_part[i];
  return out;
}

LabeledSample make_event_sample(Rng& rng, const SourceBank& bank, int class_id, const FeatureExtractor& fx,
                                const SamplerConfig& config) {
  const MixedWindow mixed = mix_event_window(rng, bank, class_id, fx, config);
  return {fx.extract(std::span<const float>(mixed.mixture)), class_id};
}

LabeledSample make_background_sample(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx,
                                     const SamplerConfig& config) {
  const size_t window = static_cast<size_t>(fx.samples_for_frames(config.window_frames));
  const AudioClip& clip = pick_background(rng, bank, window);
  return {fx.extract(random_segment(rng, clip, window)), bank.background_label()};
}

PairCategory draw_category(Rng& rng, bool background_class) {
  if (background_class) {
    switch (rng.index(4)) {
      case 0: return PairCategory::kBackgroundBackground;
      case 1: return PairCategory::kSameEvent;
      case 2: return PairCategory::kBackgroundEvent;
      default: return PairCategory::kDifferentEvent;
    }
  }
  return rng.index(2) == 0 ? PairCategory::kSameEvent : PairCategory::kDifferentEvent;
}

Pair sample_pair(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx, const SamplerConfig& config) {
  const PairCategory category = draw_category(rng, config.background_class);
  return make_pair(rng, bank, fx, config, category);
}

Pair make_pair(Rng& rng, const SourceBank& bank, const FeatureExtractor& fx, const SamplerConfig& config,
               PairCategory category) {
  const int classes = bank.event_class_count();
  if (classes < 1) throw Error(ErrorCode::kInsufficientClasses, "bank has no event classes");
  Pair pair;
  pair.category = category;
  auto any_class = [&] { return 1 + static_cast<int>(rng.index(static_cast<size_t>(classes))); };
  switch (pair.category) {
    case PairCategory::kBackgroundBackground:
      pair.first = make_background_sample(rng, bank, fx, config);
      pair.second = make_background_sample(rng, bank, fx, config);
      break;
    case PairCategory::kSameEvent: {
      const int c = any_class();
      pair.first = make_event_sample(rng, bank, c, fx, config);
      pair.second = make_event_sample(rng, bank, c, fx, config);
      break;
    }
    case PairCategory::kBackgroundEvent:
      pair.first = make_event_sample(rng, bank, any_class(), fx, config);
      pair.second = make_background_sample(rng, bank, fx, config);
      break;
    case PairCategory::kDifferentEvent: {
      if (classes < 2) {
        throw Error(ErrorCode::kInsufficientClasses, "different-class pair needs at least two event classes");
      }
      const int a = any_class();
      int b = 1 + static_cast<int>(rng.index(static_cast<size_t>(classes - 1)));
      if (b >= a) ++b;
      pair.first = make_event_sample(rng, bank, a, fx, config);
      pair.second = make_event_sample(rng, bank, b, fx, config);
      break;
    }
  }
  pair.same = pair.first.label == pair.second.label;
  const int bg = bank.background_label();
  pair.weight = (pair.first.label == bg || pair.second.label == bg) ? config.background_weight : 1.0;
  return pair;
}

EvalClip generate_eval_clip(Rng& rng, const SourceBank& bank, int target_class, const EvalClipConfig& config) {
  check_class(bank, target_class);
  if (config.ebr_set_db.empty()) throw Error(ErrorCode::kInvalidConfig, "EBR set is empty");
  if (!(config.duration_s > 0.0)) throw Error(ErrorCode::kInvalidConfig, "duration must be positive");
  const size_t length = static_cast<size_t>(std::llround(config.duration_s * bank.sample_rate));
  const AudioClip& bg_clip = pick_background(rng, bank, length);
  const auto bg = random_segment(rng, bg_clip, length);

  EvalClip out;
  out.clip.sample_rate = bank.sample_rate;
  out.clip.samples.assign(bg.begin(), bg.end());

  auto place = [&](int class_id, bool annotate) {
    const auto& sources = bank.events[static_cast<size_t>(class_id - 1)];
    const AudioClip& event = sources[rng.index(sources.size())];
    if (event.samples.size() > length) {
      throw Error(ErrorCode::kTooShort, "event of " + std::to_string(event.duration_s()) +
                                            " s does not fit a " + std::to_string(config.duration_s) +
                                            " s clip");
    }
    const size_t pos = rng.index(length - event.samples.size() + 1);
    const double ebr = config.ebr_set_db[rng.index(config.ebr_set_db.size())];
    const double g = ebr_gain(event.samples, bg.subspan(pos, event.samples.size()), ebr);
    for (size_t i = 0; i < event.samples.size(); ++i) {
      out.clip.samples[pos + i] += static_cast<float>(g) * event.samples[i];
    }
    if (annotate) {
      out.ebr_db = ebr;
      const double sr = bank.sample_rate;
      out.clip.annotations.push_back({static_cast<double>(pos) / sr,
                                      static_cast<double>(pos + event.samples.size()) / sr,
                                      bank.class_name(class_id)});
    }
  };

  if (rng.bernoulli(config.presence_rate)) place(target_class, true);
  if (config.distractors > 0) {
    if (bank.event_class_count() < 2) {
      throw Error(ErrorCode::kInsufficientClasses, "distractors need a non-target event class");
    }
    for (int i = 0; i < config.distractors; ++i) {
      int c = 1 + static_cast<int>(rng.index(static_cast<size_t>(bank.event_class_count() - 1)));
      if (c >= target_class) ++c;
      place(c, false);
    }
  }
  return out;
}

}  // namespace fsed
