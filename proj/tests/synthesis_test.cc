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

#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "fsed/synthesis.h"
#include "fsed/synthetic_bank.h"
#include "test_util.h"

using namespace fsed;

namespace {

SourceBank small_bank(uint64_t seed, int classes = 3) {
  SyntheticBankConfig cfg;
  cfg.clips_per_class = 3;
  cfg.backgrounds_per_color = 1;
  cfg.background_s = 6.0;
  auto specs = default_tone_classes();
  specs.resize(static_cast<size_t>(classes));
  Rng rng(seed);
  return make_synthetic_bank(rng, specs, cfg);
}

const FeatureExtractor& extractor() {
  static const FeatureExtractor fx;
  return fx;
}

}  // namespace

TEST_SUITE("ebr") {
  TEST_CASE("gain for equal-RMS inputs") {
    const std::vector<float> a(100, 0.3f), b(100, -0.3f);
    CHECK(ebr_gain(a, b, 0.0) == doctest::Approx(1.0));
    CHECK(ebr_gain(a, b, 6.0) == doctest::Approx(1.9953).epsilon(1e-4));
    CHECK(ebr_gain(a, b, 6.0) == doctest::Approx(std::pow(10.0, 6.0 / 20.0)));
  }

  TEST_CASE("gain realizes the requested level ratio") {
    Rng rng(2);
    std::vector<float> e(500), g(500);
    for (size_t i = 0; i < e.size(); ++i) {
      e[i] = static_cast<float>(rng.normal(0.0, 0.2));
      g[i] = static_cast<float>(rng.normal(0.0, 0.05));
    }
    for (double db : {-6.0, 3.0, 18.0}) {
      const double gain = ebr_gain(e, g, db);
      CHECK(20.0 * std::log10(gain * rms(e) / rms(g)) == doctest::Approx(db));
    }
  }

  TEST_CASE("silent sources are rejected") {
    const std::vector<float> zero(100, 0.0f), one(100, 1.0f);
    CHECK_ERROR_CODE(ebr_gain(zero, one, 0.0), ErrorCode::kSilentSource);
    CHECK_ERROR_CODE(ebr_gain(one, zero, 0.0), ErrorCode::kSilentSource);
  }
}

TEST_SUITE("event samples") {
  TEST_CASE("drawn EBR stays in range and mixing is linear") {
    const SourceBank bank = small_bank(1);
    const auto& fx = extractor();
    SamplerConfig cfg;
    Rng rng(3);
    const int c0 = 40, c1 = 59;
    for (int i = 0; i < 200; ++i) {
      const MixedWindow m = mix_event_window(rng, bank, 1 + i % 3, fx, cfg);
      CHECK(m.ebr_db >= 0.0);
      CHECK(m.ebr_db <= 18.0);
      REQUIRE(m.mixture.size() == static_cast<size_t>(fx.samples_for_frames(100)));
      // Outside the event span the mixture is the background.
      for (size_t s = 0; s < m.event_begin; ++s) CHECK(m.mixture[s] == m.background[s]);
      for (size_t s = m.event_end; s < m.mixture.size(); ++s) CHECK(m.mixture[s] == m.background[s]);
      // Every central frame overlaps the event.
      for (int f = c0; f <= c1; ++f) {
        const size_t frame_begin = static_cast<size_t>(f * fx.hop());
        const size_t frame_end = frame_begin + static_cast<size_t>(fx.frame_len());
        CHECK(m.event_begin < frame_end);
        CHECK(m.event_end > frame_begin);
      }
    }
  }

  TEST_CASE("mixture equals background plus scaled event") {
    SourceBank bank = small_bank(4, 2);
    // A constant event makes the scaled source directly observable.
    AudioClip flat;
    flat.samples.assign(8000, 0.25f);
    bank.events[0] = {flat};
    SamplerConfig cfg;
    Rng rng(5);
    const MixedWindow m = mix_event_window(rng, bank, 1, extractor(), cfg);
    REQUIRE(m.event_end - m.event_begin == 8000);
    for (size_t s = m.event_begin; s < m.event_end; ++s) {
      CHECK(m.mixture[s] == doctest::Approx(m.background[s] + m.gain * 0.25).epsilon(1e-6));
    }
  }

  TEST_CASE("long events are cropped to cover the central frames") {
    SourceBank bank = small_bank(6, 2);
    AudioClip longer;
    longer.samples.assign(3 * 16000, 0.1f);
    bank.events[1] = {longer};
    SamplerConfig cfg;
    Rng rng(7);
    const auto& fx = extractor();
    for (int i = 0; i < 20; ++i) {
      const MixedWindow m = mix_event_window(rng, bank, 2, fx, cfg);
      CHECK(m.event_begin <= static_cast<size_t>(40 * fx.hop()));
      CHECK(m.event_end >= static_cast<size_t>(59 * fx.hop() + fx.frame_len()));
      const LabeledSample s = make_event_sample(rng, bank, 2, fx, cfg);
      CHECK(s.label == 2);
      CHECK(s.features.frames() == 100);
      CHECK(s.features.channels() == 40);
    }
  }

  TEST_CASE("same seed gives identical samples") {
    const SourceBank bank = small_bank(8);
    SamplerConfig cfg;
    Rng a(11), b(11);
    CHECK(make_event_sample(a, bank, 2, extractor(), cfg).features.values ==
          make_event_sample(b, bank, 2, extractor(), cfg).features.values);
  }

  TEST_CASE("unknown class ids are rejected") {
    const SourceBank bank = small_bank(9);
    SamplerConfig cfg;
    Rng rng(1);
    CHECK_ERROR_CODE(make_event_sample(rng, bank, 0, extractor(), cfg), ErrorCode::kUnknownClass);
    CHECK_ERROR_CODE(make_event_sample(rng, bank, 4, extractor(), cfg), ErrorCode::kUnknownClass);
  }
}

TEST_SUITE("background samples") {
  TEST_CASE("label is the background class and offsets vary") {
    const SourceBank bank = small_bank(10);
    SamplerConfig cfg;
    Rng rng(12);
    int repeats = 0;
    for (int i = 0; i < 50; ++i) {
      const LabeledSample a = make_background_sample(rng, bank, extractor(), cfg);
      const LabeledSample b = make_background_sample(rng, bank, extractor(), cfg);
      CHECK(a.label == bank.background_label());
      CHECK(a.label == 4);
      repeats += a.features.values == b.features.values ? 1 : 0;
    }
    CHECK(repeats == 0);
  }

  TEST_CASE("too-short backgrounds are rejected") {
    SourceBank bank = small_bank(13);
    AudioClip shorter;
    shorter.samples.assign(8000, 0.1f);
    bank.backgrounds = {shorter};
    SamplerConfig cfg;
    Rng rng(1);
    CHECK_ERROR_CODE(make_background_sample(rng, bank, extractor(), cfg), ErrorCode::kTooShort);
  }
}

TEST_SUITE("pairs") {
  TEST_CASE("category draws are balanced") {
    Rng rng(14);
    std::array<int, 4> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<size_t>(draw_category(rng, true))];
    for (int c : counts) CHECK(std::abs(c / double(n) - 0.25) <= 0.02);
    std::array<int, 4> ablation{};
    for (int i = 0; i < n; ++i) ++ablation[static_cast<size_t>(draw_category(rng, false))];
    CHECK(ablation[static_cast<size_t>(PairCategory::kBackgroundBackground)] == 0);
    CHECK(ablation[static_cast<size_t>(PairCategory::kBackgroundEvent)] == 0);
    CHECK(std::abs(ablation[static_cast<size_t>(PairCategory::kSameEvent)] / double(n) - 0.5) <= 0.02);
  }

  TEST_CASE("pair labels, weights and categories agree") {
    const SourceBank bank = small_bank(15);
    SamplerConfig cfg;
    Rng rng(16);
    const int bg = bank.background_label();
    std::set<int> event_labels;
    for (int i = 0; i < 400; ++i) {
      const Pair p = sample_pair(rng, bank, extractor(), cfg);
      CHECK(p.same == (p.first.label == p.second.label));
      const bool has_bg = p.first.label == bg || p.second.label == bg;
      CHECK(p.weight == (has_bg ? 2.0 : 1.0));
      switch (p.category) {
        case PairCategory::kBackgroundBackground:
          CHECK(p.first.label == bg);
          CHECK(p.second.label == bg);
          break;
        case PairCategory::kSameEvent:
          CHECK(p.first.label != bg);
          CHECK(p.same);
          break;
        case PairCategory::kBackgroundEvent:
          CHECK(has_bg);
          CHECK_FALSE(p.same);
          break;
        case PairCategory::kDifferentEvent:
          CHECK_FALSE(has_bg);
          CHECK_FALSE(p.same);
          break;
      }
      if (p.first.label != bg) event_labels.insert(p.first.label);
    }
    CHECK(event_labels == std::set<int>{1, 2, 3});
  }

  TEST_CASE("explicit categories set l and w") {
    const SourceBank bank = small_bank(17);
    SamplerConfig cfg;
    Rng rng(18);
    const Pair bg_evt = make_pair(rng, bank, extractor(), cfg, PairCategory::kBackgroundEvent);
    CHECK_FALSE(bg_evt.same);
    CHECK(bg_evt.weight == 2.0);
    const Pair same = make_pair(rng, bank, extractor(), cfg, PairCategory::kSameEvent);
    CHECK(same.same);
    CHECK(same.weight == 1.0);
  }

  TEST_CASE("different-class pairs need two classes") {
    const SourceBank bank = small_bank(19, 1);
    SamplerConfig cfg;
    Rng rng(1);
    CHECK_ERROR_CODE(make_pair(rng, bank, extractor(), cfg, PairCategory::kDifferentEvent),
                     ErrorCode::kInsufficientClasses);
  }
}

TEST_SUITE("eval clips") {
  TEST_CASE("presence rate, EBR set and annotation fidelity") {
    SyntheticBankConfig bcfg;
    bcfg.clips_per_class = 4;
    bcfg.backgrounds_per_color = 1;
    bcfg.background_s = 40.0;
    Rng brng(20);
    const auto specs = default_tone_classes();
    const SourceBank bank = make_synthetic_bank(brng, specs, bcfg);
    EvalClipConfig cfg;
    Rng rng(21);
    int positives = 0;
    for (int i = 0; i < 500; ++i) {
      const EvalClip clip = generate_eval_clip(rng, bank, 2, cfg);
      CHECK(clip.clip.samples.size() == 30u * 16000u);
      CHECK_NOTHROW(validate_annotations(clip.clip));
      if (clip.clip.annotations.empty()) {
        CHECK_FALSE(clip.ebr_db.has_value());
        continue;
      }
      ++positives;
      REQUIRE(clip.clip.annotations.size() == 1);
      const double ebr = *clip.ebr_db;
      CHECK((ebr == -6.0 || ebr == 0.0 || ebr == 6.0));
      CHECK(clip.clip.annotations[0].label == specs[1].name);
      if (ebr >= 0.0) {
        const auto& a = clip.clip.annotations[0];
        const size_t on = static_cast<size_t>(std::llround(a.onset_s * 16000));
        const size_t off = static_cast<size_t>(std::llround(a.offset_s * 16000));
        const size_t len = off - on;
        const std::span<const float> all(clip.clip.samples);
        const size_t other = on >= len ? on - len : off;  // equal-length span without the event
        REQUIRE(other + len <= all.size());
        CHECK(rms(all.subspan(on, len)) > rms(all.subspan(other, len)));
      }
    }
    CHECK(std::abs(positives - 250) <= 35);
  }

  TEST_CASE("zero presence gives empty annotations") {
    const SourceBank bank = small_bank(22);
    EvalClipConfig cfg;
    cfg.duration_s = 5.0;
    cfg.presence_rate = 0.0;
    Rng rng(23);
    for (int i = 0; i < 20; ++i) CHECK(generate_eval_clip(rng, bank, 1, cfg).clip.annotations.empty());
  }

  TEST_CASE("distractors stay unannotated") {
    const SourceBank bank = small_bank(24);
    EvalClipConfig cfg;
    cfg.duration_s = 5.0;
    cfg.presence_rate = 0.0;
    cfg.distractors = 2;
    Rng rng(25);
    const EvalClip clip = generate_eval_clip(rng, bank, 1, cfg);
    CHECK(clip.clip.annotations.empty());
  }
}

TEST_SUITE("bank") {
  TEST_CASE("validation and subsets") {
    const SourceBank bank = small_bank(26);
    CHECK_NOTHROW(bank.validate());
    CHECK(bank.event_class_count() == 3);
    CHECK(bank.class_id("tone800") == 3);
    CHECK_ERROR_CODE(bank.class_id("nope"), ErrorCode::kUnknownClass);
    const std::vector<std::string> names = {"tone800", "tone300"};
    const SourceBank sub = bank.subset(names);
    CHECK(sub.class_names == names);
    CHECK(sub.class_id("tone300") == 2);
    SourceBank empty = bank;
    empty.backgrounds.clear();
    CHECK_ERROR_CODE(empty.validate(), ErrorCode::kInvalidConfig);
  }
}
