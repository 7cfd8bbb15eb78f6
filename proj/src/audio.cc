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

#include "fsed/audio.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fsed/error.h"

namespace fsed {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV and dump I/O assume a little-endian host");

uint32_t read_u32(const std::vector<char>& buf, size_t pos) {
  uint32_t v;
  std::memcpy(&v, buf.data() + pos, 4);
  return v;
}

uint16_t read_u16(const std::vector<char>& buf, size_t pos) {
  uint16_t v;
  std::memcpy(&v, buf.data() + pos, 2);
  return v;
}

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void validate_annotations(const AudioClip& clip) {
  const double duration = clip.duration_s();
  for (const auto& a : clip.annotations) {
    if (!(a.onset_s <= a.offset_s) || a.onset_s < 0.0 || a.offset_s > duration + 1e-9) {
      throw Error(ErrorCode::kShapeMismatch,
                  "annotation [" + std::to_string(a.onset_s) + ", " +
                      std::to_string(a.offset_s) + "] outside clip of " +
                      std::to_string(duration) + " s");
    }
  }
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kIo, path.string() + " is not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const uint32_t size = read_u32(buf, pos + 4);
    const size_t body = pos + 8;
    if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > buf.size()) break;
      format = read_u16(buf, body);
      channels = read_u16(buf, body + 2);
      rate = read_u32(buf, body + 4);
      bits = read_u16(buf, body + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real tag in the sub-format GUID.
      if (format == 0xFFFE && size >= 26 && body + 26 <= buf.size()) format = read_u16(buf, body + 24);
      have_fmt = true;
    } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
      if (!have_fmt) break;
      if (channels == 0) throw Error(ErrorCode::kIo, path.string() + ": zero channels");
      const size_t avail = std::min<size_t>(size, buf.size() - body);
      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      if (format == 1 && bits == 16) {
        const size_t frames = avail / (2u * channels);
        clip.samples.resize(frames);
        for (size_t i = 0; i < frames; ++i) {
          int16_t v;
          std::memcpy(&v, buf.data() + body + i * 2u * channels, 2);
          clip.samples[i] = static_cast<float>(v) / 32768.0f;
        }
      } else if (format == 3 && bits == 32) {
        const size_t frames = avail / (4u * channels);
        clip.samples.resize(frames);
        for (size_t i = 0; i < frames; ++i) {
          std::memcpy(&clip.samples[i], buf.data() + body + i * 4u * channels, 4);
        }
      } else {
        throw Error(ErrorCode::kIo, path.string() + ": unsupported WAV encoding (format " +
                                        std::to_string(format) + ", " + std::to_string(bits) +
                                        " bits)");
      }
      return clip;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(ErrorCode::kIo, path.string() + ": missing fmt or data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 4);
  out.write("RIFF", 4);
  put<uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<uint32_t>(out, 16);
  put<uint16_t>(out, 3);  // IEEE float
  put<uint16_t>(out, 1);
  put<uint32_t>(out, static_cast<uint32_t>(clip.sample_rate));
  put<uint32_t>(out, static_cast<uint32_t>(clip.sample_rate) * 4);
  put<uint16_t>(out, 4);
  put<uint16_t>(out, 32);
  out.write("data", 4);
  put<uint32_t>(out, data_bytes);
  out.write(reinterpret_cast<const char*>(clip.samples.data()),
            static_cast<std::streamsize>(data_bytes));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace fsed
