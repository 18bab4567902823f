// Copyright 2026 The followup-extractor Authors
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

#ifndef FOLLOWUP_EVAL_HPP_
#define FOLLOWUP_EVAL_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "followup/pipeline.hpp"
#include "json.hpp"

// Pair-level scoring. Counts are pooled across notes (micro aggregation)
// before any ratio is taken; the bootstrap resamples whole notes.

namespace followup {

// Per-note tallies; ratios are only ever formed after pooling.
struct NoteOutcome {
  std::string note_id;
  int n_pred = 0;
  int n_gold = 0;
  int n_correct = 0;          // exact (action, offset) matches
  double abs_err_sum = 0.0;   // sum over label-matched predictions of the
                              // smallest |pred - gold| offset gap
  int n_label_matched = 0;    // predictions sharing an action with gold

  nlohmann::ordered_json to_json() const;
  static NoteOutcome from_json(const nlohmann::ordered_json& j);
};

NoteOutcome score_note(const std::string& note_id,
                       const std::set<CanonicalPair>& predicted,
                       const std::set<CanonicalPair>& gold);

// One outcome per gold note, matched to predictions by id and sorted by
// note_id. Throws UnknownNoteId for predictions naming absent notes and
// ValidationError for gold notes left unpredicted or predicted twice.
std::vector<NoteOutcome> score_corpus(const std::vector<Note>& gold,
                                      const std::vector<NotePrediction>& preds);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> mae;  // null when no prediction matched any label

  nlohmann::ordered_json to_json() const;
};

// Micro aggregation. A split with no predicted and no gold pairs scores
// F1 = 1; a zero precision + recall sum scores 0. Throws EmptyEvaluation
// on an empty outcome list.
Metrics aggregate(const std::vector<NoteOutcome>& outcomes);

struct CiInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool overlaps(const CiInterval& other) const {  // closed intervals
    return lo <= other.hi && other.lo <= hi;
  }
};

// Linear-interpolation percentile (h = (n-1) q) of unsorted values.
double percentile(std::vector<double> values, double q);

struct BootstrapReport {
  Metrics point;
  CiInterval precision_ci, recall_ci, f1_ci;
  std::optional<CiInterval> mae_ci;
  int n_replicas = 0;
  int n_mae_null_replicas = 0;  // replicas excluded from the MAE interval
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
  static BootstrapReport from_json(const nlohmann::ordered_json& j);
};

// Note-level percentile bootstrap with 95% intervals. Replica r draws from
// an independent stream seeded with derive_seed(seed, r). Outcomes are
// re-sorted by note_id first so the result depends only on the set.
BootstrapReport bootstrap(std::vector<NoteOutcome> outcomes,
                          int n_replicas = 1000, std::uint64_t seed = 123);

struct ComparisonReport {
  std::string verdict;  // "a_better", "b_better", "no_significant_difference"
  double delta_f1 = 0.0;
  CiInterval a_f1_ci, b_f1_ci;

  nlohmann::ordered_json to_json() const;
};

// Compares two systems on the same notes via F1 CI overlap. Throws
// SplitMismatch when the note id sets differ.
ComparisonReport compare_systems(const std::vector<NoteOutcome>& a,
                                 const std::vector<NoteOutcome>& b,
                                 int n_replicas = 1000,
                                 std::uint64_t seed = 123);

// External predictions given as (action, calendar date) items:
// {"note_id": ..., "items": [{"action": ..., "period_date": "YYYY-MM-DD"}]}.
// Dates resolve to offsets against the note's visit date; negative offsets
// are kept. Unrecognized action strings drop the item and are counted.
struct BaselineIngest {
  std::vector<NotePrediction> preds;
  int n_items = 0;
  int n_no_match = 0;
};

BaselineIngest ingest_baseline(const std::string& path,
                               const std::vector<Note>& notes,
                               const Ontology& ontology);

}  // namespace followup

#endif  // FOLLOWUP_EVAL_HPP_
