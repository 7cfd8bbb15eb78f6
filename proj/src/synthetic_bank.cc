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

#include "fsed/synthetic_bank.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fsed {

std::vector<ToneClassSpec> default_tone_classes() {
  return {
      {"tone300", 300.0, 3.0, 4},   {"tone500", 500.0, 5.0, 3},  {"tone800", 800.0, 7.0, 3},
      {"tone1200", 1200.0, 4.0, 2}, {"tone1800", 1800.0, 9.0, 2}, {"tone2600", 2600.0, 6.0, 2},
  };
}

AudioClip synth_tone_burst(Rng& rng, const ToneClassSpec& spec, double duration_s, const SyntheticBankConfig& cfg) {
  const int sr = cfg.sample_rate;
  const size_t n = static_cast<size_t>(std::llround(duration_s * sr));
  const double f0 = spec.fundamental_hz * (1.0 + rng.uniform(-cfg.fundamental_jitter, cfg.fundamental_jitter));
  const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(static_cast<size_t>(spec.harmonics));
  for (auto& p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double attack = 0.02 * sr, release = 0.05 * sr;

  AudioClip clip;
  clip.sample_rate = sr;
  clip.samples.resize(n);
  double peak = 0.0;
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    double tone = 0.0;
    for (int h = 1; h <= spec.harmonics; ++h) {
      const double f = h * f0;
      if (f >= 0.45 * sr) break;
      tone += std::sin(2.0 * std::numbers::pi * f * t + phases[static_cast<size_t>(h - 1)]) / h;
    }
    const double am = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * spec.am_rate_hz * t + am_phase);
    const double di = static_cast<double>(i);
    const double tail = static_cast<double>(n - 1 - i);
    double env = 1.0;
    if (di < attack) env = 0.5 - 0.5 * std::cos(std::numbers::pi * di / attack);
    if (tail < release) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * tail / release));
    x[i] = env * am * tone;
    peak = std::max(peak, std::abs(x[i]));
  }
  const double scale = peak > 0.0 ? 0.5 / peak : 0.0;
  for (size_t i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(x[i] * scale);
  return clip;
}

AudioClip synth_noise(Rng& rng, NoiseColor color, double duration_s, double target_rms, int sample_rate) {
  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> x(n);
  // Pink: Paul Kellet's refined filter. Brown: leaky integrator.
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0, brown = 0;
  for (size_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    switch (color) {
      case NoiseColor::kWhite:
        x[i] = w;
        break;
      case NoiseColor::kPink: {
        b0 = 0.99886 * b0 + w * 0.0555179;
        b1 = 0.99332 * b1 + w * 0.0750759;
        b2 = 0.96900 * b2 + w * 0.1538520;
        b3 = 0.86650 * b3 + w * 0.3104856;
        b4 = 0.55000 * b4 + w * 0.5329522;
        b5 = -0.7616 * b5 - w * 0.0168980;
        x[i] = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
        b6 = w * 0.115926;
        break;
      }
      case NoiseColor::kBrown:
        brown = 0.995 * brown + 0.1 * w;
        x[i] = brown;
        break;
    }
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(std::max<size_t>(n, 1));
  double energy = 0.0;
  for (double& v : x) {
    v -= mean;
    energy += v * v;
  }
  const double scale = energy > 0.0 ? target_rms / std::sqrt(energy / static_cast<double>(n)) : 0.0;
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(x[i] * scale);
  return clip;
}

SourceBank make_synthetic_bank(Rng& rng, std::span<const ToneClassSpec> classes, const SyntheticBankConfig& cfg) {
  SourceBank bank;
  bank.sample_rate = cfg.sample_rate;
  for (const auto& spec : classes) {
    bank.class_names.push_back(spec.name);
    auto& clips = bank.events.emplace_back();
    for (int i = 0; i < cfg.clips_per_class; ++i) {
      clips.push_back(synth_tone_burst(rng, spec, rng.uniform(cfg.min_event_s, cfg.max_event_s), cfg));
    }
  }
  for (NoiseColor color : {NoiseColor::kWhite, NoiseColor::kPink, NoiseColor::kBrown}) {
    for (int i = 0; i < cfg.backgrounds_per_color; ++i) {
      const double level = rng.uniform(cfg.min_background_rms, cfg.max_background_rms);
      bank.backgrounds.push_back(synth_noise(rng, color, cfg.background_s, level, cfg.sample_rate));
    }
  }
  return bank;
}

}  // namespace fsed
