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

#ifndef FSED_AUDIO_H_
#define FSED_AUDIO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fsed {

// A labeled occurrence inside a clip, in seconds from the clip start.
struct Annotation {
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string label;

  bool operator==(const Annotation&) const = default;
};

struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;
  std::vector<Annotation> annotations;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Throws Error(kShapeMismatch) when an annotation has onset > offset or falls
// outside the clip.
void validate_annotations(const AudioClip& clip);

double rms(std::span<const float> samples);

// Reads RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples. Multichannel
// files yield their first channel.
AudioClip read_wav(const std::filesystem::path& path);

// Writes 32-bit IEEE float mono, so values round-trip exactly.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace fsed

#endif  // FSED_AUDIO_H_
