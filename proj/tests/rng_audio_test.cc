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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "fsed/audio.h"
#include "fsed/error.h"
#include "fsed/rng.h"
#include "oracles.h"

using namespace fsed;

TEST_CASE("rng is reproducible and split streams ignore prior draws") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng fresh(7), used(7);
  for (int i = 0; i < 10; ++i) used.next_u64();
  Rng s1 = fresh.split(3), s2 = used.split(3);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(fresh.split(3).next_u64() != fresh.split(4).next_u64());
}

TEST_CASE("rng variates stay in range with sensible moments") {
  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.index(7) < 7u);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("rms of a constant and of a sine") {
  const std::vector<float> c(100, 0.5f);
  CHECK(rms(c) == doctest::Approx(0.5));
  std::vector<float> s(16000);
  for (size_t i = 0; i < s.size(); ++i) s[i] = static_cast<float>(std::sin(2 * M_PI * 100.0 * i / 16000.0));
  CHECK(rms(s) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(rms(std::span<const float>()) == 0.0);
}

TEST_CASE("float wav round trip is exact") {
  const auto dir = oracle::scratch_dir("wav");
  AudioClip clip;
  clip.sample_rate = 22050;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) clip.samples.push_back(static_cast<float>(rng.uniform(-1, 1)));
  write_wav(dir / "a.wav", clip);
  const AudioClip back = read_wav(dir / "a.wav");
  CHECK(back.sample_rate == 22050);
  CHECK(back.samples == clip.samples);
}

namespace {

void put32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void put16(std::ofstream& f, uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); }

}  // namespace

TEST_CASE("pcm16 stereo wav yields the first channel") {
  const auto path = oracle::scratch_dir("pcm") / "s.wav";
  const std::vector<int16_t> frames = {1000, -1, -32768, 2, 32767, 3};
  {
    std::ofstream f(path, std::ios::binary);
    f.write("RIFF", 4);
    put32(f, 36 + 12);
    f.write("WAVEfmt ", 8);
    put32(f, 16);
    put16(f, 1);
    put16(f, 2);
    put32(f, 8000);
    put32(f, 8000 * 4);
    put16(f, 4);
    put16(f, 16);
    f.write("data", 4);
    put32(f, 12);
    for (int16_t v : frames) put16(f, static_cast<uint16_t>(v));
  }
  const AudioClip clip = read_wav(path);
  CHECK(clip.sample_rate == 8000);
  REQUIRE(clip.samples.size() == 3);
  CHECK(clip.samples[0] == doctest::Approx(1000.0 / 32768.0));
  CHECK(clip.samples[1] == -1.0f);
  CHECK(clip.samples[2] == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("malformed wav is an io error") {
  const auto path = oracle::scratch_dir("badwav") / "x.wav";
  std::ofstream(path) << "not a wav";
  CHECK_THROWS_AS(read_wav(path), Error);
  CHECK_THROWS_AS(read_wav(path.parent_path() / "missing.wav"), Error);
}

TEST_CASE("annotations must be ordered and inside the clip") {
  AudioClip clip;
  clip.samples.assign(16000, 0.0f);
  clip.annotations = {{0.2, 0.5, "a"}};
  CHECK_NOTHROW(validate_annotations(clip));
  clip.annotations = {{0.6, 0.5, "a"}};
  CHECK_THROWS_AS(validate_annotations(clip), Error);
  clip.annotations = {{0.5, 1.5, "a"}};
  CHECK_THROWS_AS(validate_annotations(clip), Error);
}
