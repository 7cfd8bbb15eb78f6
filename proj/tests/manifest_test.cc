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

#include <fstream>

#include "fsed/manifest.h"
#include "oracles.h"
#include "test_util.h"

using namespace fsed;

namespace {

AudioClip ramp(size_t n, int rate = 16000) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(0.5 * std::sin(0.01 * i));
  return clip;
}

}  // namespace

TEST_SUITE("manifest") {
  const std::filesystem::path dir = oracle::scratch_dir("manifest_test");

  TEST_CASE("round trip with relative paths") {
    std::filesystem::create_directories(dir / "events");
    const std::vector<ManifestRecord> records = {
        {dir / "events" / "a.wav", "event", "cat", 0.5, 1.5},
        {dir / "bg.wav", "background", std::nullopt, std::nullopt, std::nullopt},
        {"/abs/elsewhere.wav", "event", "dog", std::nullopt, 2.0},
    };
    write_manifest(dir / "m.jsonl", records);
    std::ifstream in(dir / "m.jsonl");
    std::string first;
    std::getline(in, first);
    CHECK(first.find("\"events/a.wav\"") != std::string::npos);
    const auto back = read_manifest(dir / "m.jsonl");
    REQUIRE(back.size() == 3);
    CHECK(back[0].path == dir / "events" / "a.wav");
    CHECK(back[0].role == "event");
    CHECK(back[0].label == "cat");
    CHECK(back[0].onset_s == 0.5);
    CHECK(back[0].offset_s == 1.5);
    CHECK(back[1].role == "background");
    CHECK_FALSE(back[1].label.has_value());
    CHECK(back[2].path == "/abs/elsewhere.wav");
    CHECK_FALSE(back[2].onset_s.has_value());
    CHECK(back[2].offset_s == 2.0);
  }

  TEST_CASE("defaults and malformed lines") {
    std::ofstream(dir / "d.jsonl") << "{\"path\": \"x.wav\", \"class\": \"cat\"}\n\n";
    const auto recs = read_manifest(dir / "d.jsonl");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].role == "event");
    CHECK(recs[0].path == dir / "x.wav");
    std::ofstream(dir / "bad.jsonl") << "{\"path\": \"x.wav\"}\nnot json\n";
    CHECK_ERROR_CODE(read_manifest(dir / "bad.jsonl"), ErrorCode::kIo);
    std::ofstream(dir / "nopath.jsonl") << "{\"class\": \"cat\"}\n";
    CHECK_ERROR_CODE(read_manifest(dir / "nopath.jsonl"), ErrorCode::kIo);
    CHECK_ERROR_CODE(read_manifest(dir / "missing.jsonl"), ErrorCode::kIo);
  }

  TEST_CASE("bank loading crops, resamples and filters classes") {
    write_wav(dir / "cat.wav", ramp(16000));
    write_wav(dir / "dog.wav", ramp(8000, 8000));
    write_wav(dir / "bg.wav", ramp(32000));
    const std::vector<ManifestRecord> records = {
        {dir / "cat.wav", "event", "cat", 0.25, 0.75},
        {dir / "dog.wav", "event", "dog", std::nullopt, std::nullopt},
        {dir / "bg.wav", "background", std::nullopt, std::nullopt, std::nullopt},
        {dir / "ignored.wav", "query", std::nullopt, std::nullopt, std::nullopt},
    };
    const SourceBank bank = load_source_bank(records);
    CHECK(bank.class_names == std::vector<std::string>{"cat", "dog"});
    REQUIRE(bank.events[0].size() == 1);
    CHECK(bank.events[0][0].samples.size() == 8000);
    const AudioClip original = ramp(16000);
    CHECK(bank.events[0][0].samples[0] == doctest::Approx(original.samples[4000]).epsilon(1e-4));
    CHECK(bank.events[1][0].sample_rate == 16000);
    CHECK(bank.events[1][0].samples.size() == 16000);
    CHECK(bank.backgrounds.size() == 1);

    BankLoadOptions only_dog;
    only_dog.include_classes = {"dog"};
    CHECK(load_source_bank(records, only_dog).class_names == std::vector<std::string>{"dog"});
    BankLoadOptions no_dog;
    no_dog.exclude_classes = {"dog"};
    CHECK(load_source_bank(records, no_dog).class_names == std::vector<std::string>{"cat"});
    BankLoadOptions unknown;
    unknown.include_classes = {"bird"};
    CHECK_ERROR_CODE(load_source_bank(records, unknown), ErrorCode::kUnknownClass);

    std::vector<ManifestRecord> bad_span = {records[0], records[2]};
    bad_span[0].onset_s = 0.9;
    CHECK_ERROR_CODE(load_source_bank(bad_span), ErrorCode::kIo);
    std::vector<ManifestRecord> unlabeled = {records[0], records[2]};
    unlabeled[0].label.reset();
    CHECK_ERROR_CODE(load_source_bank(unlabeled), ErrorCode::kIo);
  }
}
