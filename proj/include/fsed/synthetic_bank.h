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

#ifndef FSED_SYNTHETIC_BANK_H_
#define FSED_SYNTHETIC_BANK_H_

#include <span>
#include <string>
#include <vector>

#include "fsed/audio.h"
#include "fsed/rng.h"
#include "fsed/synthesis.h"

namespace fsed {

// Amplitude-modulated harmonic tone burst.
struct ToneClassSpec {
  std::string name;
  double fundamental_hz = 440.0;
  double am_rate_hz = 4.0;
  int harmonics = 3;
};

// Six tone classes at fundamentals 300/500/800/1200/1800/2600 Hz.
std::vector<ToneClassSpec> default_tone_classes();

enum class NoiseColor { kWhite, kPink, kBrown };

struct SyntheticBankConfig {
  int sample_rate = 16000;
  int clips_per_class = 20;
  double min_event_s = 0.5;
  double max_event_s = 1.2;
  double fundamental_jitter = 0.03;  // relative
  int backgrounds_per_color = 2;
  double background_s = 40.0;
  double min_background_rms = 0.02;
  double max_background_rms = 0.1;
};

AudioClip synth_tone_burst(Rng& rng, const ToneClassSpec& spec, double duration_s, const SyntheticBankConfig& cfg);
AudioClip synth_noise(Rng& rng, NoiseColor color, double duration_s, double target_rms, int sample_rate);

// Event clips for every class in `classes`, plus white/pink/brown background
// recordings. Deterministic in the rng state.
SourceBank make_synthetic_bank(Rng& rng, std::span<const ToneClassSpec> classes, const SyntheticBankConfig& cfg);

}  // namespace fsed

#endif  // FSED_SYNTHETIC_BANK_H_
