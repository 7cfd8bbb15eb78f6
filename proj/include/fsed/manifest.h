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

#ifndef FSED_MANIFEST_H_
#define FSED_MANIFEST_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsed/synthesis.h"

namespace fsed {

// One JSON-lines record:
//   {"path": ..., "role": "event"|"background"|"support",
//    "class": string|null, "onset": s|null, "offset": s|null}
struct ManifestRecord {
  std::filesystem::path path;
  std::string role;
  std::optional<std::string> label;
  std::optional<double> onset_s;
  std::optional<double> offset_s;
};

// Relative paths are resolved against the manifest's directory. Throws
// Error(kIo) with the offending line number on malformed input.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

// Paths under the manifest's directory are written relative to it.
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records);

struct BankLoadOptions {
  int sample_rate = 16000;
  std::vector<std::string> include_classes;  // empty: all classes
  std::vector<std::string> exclude_classes;
};

// Reads every referenced clip, resamples to the bank rate and crops event
// clips to [onset, offset] when given. Classes appear in first-seen order.
SourceBank load_source_bank(std::span<const ManifestRecord> records, const BankLoadOptions& options = {});

}  // namespace fsed

#endif  // FSED_MANIFEST_H_
