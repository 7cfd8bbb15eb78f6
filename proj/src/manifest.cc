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

#include "fsed/manifest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "fsed/dsp.h"
#include "fsed/error.h"

namespace fsed {
namespace {

using nlohmann::json;

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

bool contains(const std::vector<std::string>& list, const std::string& value) {
  return std::find(list.begin(), list.end(), value) != list.end();
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestRecord r;
      r.path = j.at("path").get<std::string>();
      if (r.path.is_relative()) r.path = base / r.path;
      r.role = j.value("role", std::string("event"));
      if (j.contains("class") && !j["class"].is_null()) r.label = j["class"].get<std::string>();
      r.onset_s = optional_number(j, "onset");
      r.offset_s = optional_number(j, "offset");
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest " + path.string());
  const auto base = path.parent_path();
  for (const auto& r : records) {
    json j;
    auto rel = r.path.lexically_relative(base);
    j["path"] = (rel.empty() || rel.string().starts_with("..")) ? r.path.string() : rel.string();
    j["role"] = r.role;
    j["class"] = r.label ? json(*r.label) : json(nullptr);
    j["onset"] = r.onset_s ? json(*r.onset_s) : json(nullptr);
    j["offset"] = r.offset_s ? json(*r.offset_s) : json(nullptr);
    out << j.dump() << '\n';
  }
}

SourceBank load_source_bank(std::span<const ManifestRecord> records, const BankLoadOptions& options) {
  SourceBank bank;
  bank.sample_rate = options.sample_rate;
  for (const auto& r : records) {
    if (r.role != "event" && r.role != "background") continue;
    AudioClip clip = read_wav(r.path);
    if (clip.samples.empty()) throw Error(ErrorCode::kEmptyAudio, r.path.string() + " has no samples");
    if (clip.sample_rate != options.sample_rate) clip = resample(clip, options.sample_rate);
    if (r.role == "background") {
      bank.backgrounds.push_back(std::move(clip));
      continue;
    }
    if (!r.label) throw Error(ErrorCode::kIo, r.path.string() + ": event record without a class");
    if (!options.include_classes.empty() && !contains(options.include_classes, *r.label)) continue;
    if (contains(options.exclude_classes, *r.label)) continue;
    if (r.onset_s || r.offset_s) {
      const double sr = clip.sample_rate;
      const size_t n = clip.samples.size();
      const size_t begin = std::min(n, static_cast<size_t>(std::llround(r.onset_s.value_or(0.0) * sr)));
      const size_t end =
          r.offset_s ? std::min(n, static_cast<size_t>(std::llround(*r.offset_s * sr))) : n;
      if (end <= begin) throw Error(ErrorCode::kIo, r.path.string() + ": empty [onset, offset] span");
      clip.samples = std::vector<float>(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                        clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
    }
    auto it = std::find(bank.class_names.begin(), bank.class_names.end(), *r.label);
    if (it == bank.class_names.end()) {
      bank.class_names.push_back(*r.label);
      bank.events.emplace_back();
      it = bank.class_names.end() - 1;
    }
    bank.events[static_cast<size_t>(it - bank.class_names.begin())].push_back(std::move(clip));
  }
  for (const auto& name : options.include_classes) {
    if (!contains(bank.class_names, name)) {
      throw Error(ErrorCode::kUnknownClass, "class '" + name + "' not found in manifest");
    }
  }
  bank.validate();
  return bank;
}

}  // namespace fsed
