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

#include "fsed/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "fsed/error.h"

namespace fsed {

bool events_compatible(const Event& ref, const Event& det, double collar_s, MatchMode mode) {
  if (ref.clip_id != det.clip_id || ref.label != det.label) return false;
  if (std::abs(det.onset_s - ref.onset_s) > collar_s) return false;
  if (mode == MatchMode::kOnsetOffset) {
    const double offset_collar = std::max(collar_s, 0.5 * (ref.offset_s - ref.onset_s));
    if (std::abs(det.offset_s - ref.offset_s) > offset_collar) return false;
  }
  return true;
}

MatchResult match_events(std::span<const Event> refs, std::span<const Event> dets, double collar_s, MatchMode mode) {
  if (!(collar_s >= 0.0)) throw Error(ErrorCode::kInvalidCollar, "collar must be non-negative");

  std::vector<size_t> det_order(dets.size());
  std::iota(det_order.begin(), det_order.end(), 0);
  std::stable_sort(det_order.begin(), det_order.end(),
                   [&](size_t a, size_t b) { return dets[a].onset_s < dets[b].onset_s; });

  std::vector<std::vector<size_t>> candidates(dets.size());
  for (size_t d = 0; d < dets.size(); ++d) {
    for (size_t r = 0; r < refs.size(); ++r) {
      if (events_compatible(refs[r], dets[d], collar_s, mode)) candidates[d].push_back(r);
    }
    std::stable_sort(candidates[d].begin(), candidates[d].end(), [&](size_t a, size_t b) {
      return std::abs(refs[a].onset_s - dets[d].onset_s) < std::abs(refs[b].onset_s - dets[d].onset_s);
    });
  }

  constexpr size_t kNone = static_cast<size_t>(-1);
  std::vector<size_t> ref_owner(refs.size(), kNone);
  std::vector<char> visited(refs.size());
  std::function<bool(size_t)> augment = [&](size_t d) {
    for (size_t r : candidates[d]) {
      if (visited[r]) continue;
      visited[r] = 1;
      if (ref_owner[r] == kNone || augment(ref_owner[r])) {
        ref_owner[r] = d;
        return true;
      }
    }
    return false;
  };
  for (size_t d : det_order) {
    std::fill(visited.begin(), visited.end(), 0);
    augment(d);
  }

  MatchResult result;
  for (size_t r = 0; r < refs.size(); ++r) {
    if (ref_owner[r] != kNone) result.matches.emplace_back(r, ref_owner[r]);
  }
  result.true_positives = static_cast<int>(result.matches.size());
  result.false_positives = static_cast<int>(dets.size()) - result.true_positives;
  result.false_negatives = static_cast<int>(refs.size()) - result.true_positives;
  return result;
}

ClassScores score_counts(const ClassCounts& c) {
  ClassScores s;
  s.counts = c;
  const double tp = c.true_positives;
  s.precision = (c.true_positives + c.false_positives) > 0 ? tp / (c.true_positives + c.false_positives) : 0.0;
  s.recall = (c.true_positives + c.false_negatives) > 0 ? tp / (c.true_positives + c.false_negatives) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

EvalReport event_f1(const std::map<std::string, ClassCounts>& counts) {
  EvalReport report;
  double sum = 0.0;
  for (const auto& [label, c] : counts) {
    report.per_class[label] = score_counts(c);
    sum += report.per_class[label].f1;
  }
  report.macro_f1 = counts.empty() ? 0.0 : sum / static_cast<double>(counts.size());
  return report;
}

EvalReport evaluate(std::span<const Event> refs, std::span<const Event> dets, double collar_s, MatchMode mode) {
  if (!(collar_s >= 0.0)) throw Error(ErrorCode::kInvalidCollar, "collar must be non-negative");
  using Key = std::pair<std::string, std::string>;  // (label, clip)
  std::map<Key, std::pair<std::vector<Event>, std::vector<Event>>> groups;
  for (const auto& e : refs) groups[{e.label, e.clip_id}].first.push_back(e);
  for (const auto& e : dets) groups[{e.label, e.clip_id}].second.push_back(e);

  std::map<std::string, ClassCounts> counts;
  for (const auto& [key, group] : groups) {
    const MatchResult m = match_events(group.first, group.second, collar_s, mode);
    ClassCounts& c = counts[key.first];
    c.true_positives += m.true_positives;
    c.false_positives += m.false_positives;
    c.false_negatives += m.false_negatives;
  }
  return event_f1(counts);
}

std::string report_json(const EvalReport& report, double collar_s) {
  nlohmann::ordered_json j;
  j["collar_s"] = collar_s;
  j["macro_f1"] = report.macro_f1;
  auto& classes = j["classes"];
  classes = nlohmann::ordered_json::object();
  for (const auto& [label, s] : report.per_class) {
    classes[label] = {{"tp", s.counts.true_positives},
                      {"fp", s.counts.false_positives},
                      {"fn", s.counts.false_negatives},
                      {"precision", s.precision},
                      {"recall", s.recall},
                      {"f1", s.f1}};
  }
  return j.dump(2);
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %6s %6s %6s %9s %9s %9s\n", "class", "TP", "FP", "FN", "precision",
                "recall", "F1");
  out << line;
  for (const auto& [label, s] : report.per_class) {
    std::snprintf(line, sizeof(line), "%-20s %6d %6d %6d %9.4f %9.4f %9.4f\n", label.c_str(),
                  s.counts.true_positives, s.counts.false_positives, s.counts.false_negatives, s.precision,
                  s.recall, s.f1);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-20s %6s %6s %6s %9s %9s %9.4f\n", "macro-average", "", "", "", "", "",
                report.macro_f1);
  out << line;
  return out.str();
}

std::vector<Event> read_events_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<Event> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (line_no == 1 && !fields.empty() && fields[0] == "clip_id") continue;
    if (fields.size() < 4) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": expected >= 4 columns");
    }
    Event e;
    e.clip_id = fields[0];
    e.label = fields[3];
    try {
      e.onset_s = std::stod(fields[1]);
      e.offset_s = std::stod(fields[2]);
      if (fields.size() >= 5 && !fields[4].empty()) e.score = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    events.push_back(std::move(e));
  }
  return events;
}

void write_events_tsv(const std::filesystem::path& path, std::span<const Event> events, bool with_score) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << (with_score ? "clip_id\tonset_s\toffset_s\tclass\tscore\n" : "clip_id\tonset_s\toffset_s\tclass\n");
  char buf[64];
  for (const auto& e : events) {
    out << e.clip_id;
    std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\t", e.onset_s, e.offset_s);
    out << buf << e.label;
    if (with_score) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", e.score);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace fsed
