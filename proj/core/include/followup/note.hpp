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

#ifndef FOLLOWUP_NOTE_HPP_
#define FOLLOWUP_NOTE_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "followup/dates.hpp"
#include "followup/ontology.hpp"
#include "json.hpp"

namespace followup {

enum class EntityKind { kTest, kTime };

struct EntitySpan {
  int entity_id = 0;
  EntityKind kind = EntityKind::kTest;
  int start = 0;  // char offset, inclusive
  int end = 0;    // char offset, exclusive
  std::string surface;
};

struct ScheduledForLink {
  int test_entity_id = 0;
  std::optional<int> time_entity_id;  // nullopt = no explicit time
};

struct CanonicalPair {
  std::string action;
  int days_offset = 0;

  auto operator<=>(const CanonicalPair&) const = default;
};

struct Note {
  std::string id;
  std::string text;
  Date visit_date{};
  Specialty specialty = Specialty::kGeneralMedicine;
  std::vector<EntitySpan> entities;
  std::vector<ScheduledForLink> links;
  std::set<CanonicalPair> pairs;

  const EntitySpan* entity(int entity_id) const;

  nlohmann::ordered_json to_json() const;
  static Note from_json(const nlohmann::ordered_json& j);

  // Checks span bounds, surface fidelity, non-overlap, link referents, the
  // pair-count bound, and (given an ontology) that gold pairs are exactly
  // what canonicalize + normalize derive from the entities and links.
  void validate(const Ontology* ontology) const;
};

// JSONL corpus io. The first line of a written file is a provenance object
// (key "provenance"); readers skip it when present.
void write_corpus_jsonl(const std::string& path,
                        const std::vector<Note>& notes,
                        const nlohmann::ordered_json& provenance);
std::vector<Note> read_corpus_jsonl(const std::string& path);

}  // namespace followup

#endif  // FOLLOWUP_NOTE_HPP_
