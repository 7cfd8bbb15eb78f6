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

#ifndef FSED_EVALUATOR_H_
#define FSED_EVALUATOR_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fsed {

// A reference or detected event. Detections carry a score (distance, lower
// is stronger); references leave it at zero.
struct Event {
  std::string clip_id;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string label;
  double score = 0.0;
};

enum class MatchMode { kOnsetOnly, kOnsetOffset };

struct MatchResult {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  std::vector<std::pair<size_t, size_t>> matches;  // (reference index, detection index)
};

// True when a detection may be paired with a reference: same clip and label,
// onsets within the collar and, in kOnsetOffset mode, offsets within
// max(collar, half the reference length).
bool events_compatible(const Event& ref, const Event& det, double collar_s, MatchMode mode);

// One-to-one matching with the maximum number of pairs (augmenting paths;
// detections visited by onset, candidates by onset proximity). Throws
// kInvalidCollar for a negative collar.
MatchResult match_events(std::span<const Event> refs, std::span<const Event> dets, double collar_s = 0.5,
                         MatchMode mode = MatchMode::kOnsetOnly);

struct ClassCounts {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};

struct ClassScores {
  ClassCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::map<std::string, ClassScores> per_class;
  double macro_f1 = 0.0;  // unweighted mean of per-class F1
};

// 0/0 ratios are reported as 0.
ClassScores score_counts(const ClassCounts& counts);
EvalReport event_f1(const std::map<std::string, ClassCounts>& counts);

// Matches per (clip, class) and aggregates counts per class.
EvalReport evaluate(std::span<const Event> refs, std::span<const Event> dets, double collar_s = 0.5,
                    MatchMode mode = MatchMode::kOnsetOnly);

std::string report_json(const EvalReport& report, double collar_s);
std::string report_table(const EvalReport& report);

// TSV with header. Reference files: clip_id, onset_s, offset_s, class.
// Detection files add a fifth score column. Header lines are skipped on
// read; a missing score column reads as 0.
std::vector<Event> read_events_tsv(const std::filesystem::path& path);
void write_events_tsv(const std::filesystem::path& path, std::span<const Event> events, bool with_score);

}  // namespace fsed

#endif  // FSED_EVALUATOR_H_
