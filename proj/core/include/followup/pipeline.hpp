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

#ifndef FOLLOWUP_PIPELINE_HPP_
#define FOLLOWUP_PIPELINE_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "followup/model.hpp"
#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "followup/temporal.hpp"

// End-to-end extraction: encoder states -> BIO tags -> merged spans ->
// link decisions -> canonical actions -> day offsets. Every predicted TEST
// span leaves a trace, including the ones that produce no pair.

namespace followup {

enum class DropReason { kLinkNone, kCanonNoMatch, kNormFail };

std::string_view drop_reason_name(DropReason r);
DropReason drop_reason_from_name(std::string_view name);

// One predicted TEST span and what became of it.
struct PredictionItem {
  EntitySpan test;
  std::optional<EntitySpan> time;     // linked TIME span, if any
  double link_prob = 0.0;             // probability of the chosen option
  std::optional<std::string> action;  // canonical label name
  std::optional<NormalizationTrace> norm;
  std::optional<DropReason> drop;     // set iff no pair was produced

  nlohmann::ordered_json to_json() const;
  static PredictionItem from_json(const nlohmann::ordered_json& j);
};

struct NotePrediction {
  std::string note_id;
  std::vector<EntitySpan> entities;   // merged predicted spans, both kinds
  std::vector<PredictionItem> items;  // one per predicted TEST span
  std::set<CanonicalPair> pairs;

  nlohmann::ordered_json to_json() const;
  static NotePrediction from_json(const nlohmann::ordered_json& j);
};

NotePrediction extract(const Model& model, const Ontology& ontology,
                       const Note& note);

// Order-preserving batch extraction.
std::vector<NotePrediction> extract_batch(const Model& model,
                                          const Ontology& ontology,
                                          const std::vector<Note>& notes);

// Predictions JSONL io; the first written line is a provenance object.
void write_predictions_jsonl(const std::string& path,
                             const std::vector<NotePrediction>& preds,
                             const nlohmann::ordered_json& provenance);
std::vector<NotePrediction> read_predictions_jsonl(const std::string& path);

// Replays canonicalization and normalization over gold entities and links
// and compares the derived pairs with the stored ones.
struct AuditReport {
  int n_notes = 0;
  int n_pairs = 0;
  int n_mismatched_notes = 0;
  std::vector<std::string> mismatched_ids;

  nlohmann::ordered_json to_json() const;
};

AuditReport audit_corpus(const std::vector<Note>& notes,
                         const Ontology& ontology);

// The pair set the gold annotations derive to, via the same canonicalize +
// normalize path the model pipeline uses.
std::set<CanonicalPair> replay_gold_pairs(const Note& note,
                                          const Ontology& ontology);

}  // namespace followup

#endif  // FOLLOWUP_PIPELINE_HPP_
