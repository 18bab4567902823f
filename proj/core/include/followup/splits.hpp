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

#ifndef FOLLOWUP_SPLITS_HPP_
#define FOLLOWUP_SPLITS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "json.hpp"

namespace followup {

enum class SplitId {
  kTrain,
  kSeenVal,
  kOovVal,
  kSeenTest,
  kOovTest,
  kDiscarded,
};

std::string_view split_name(SplitId s);
SplitId split_from_name(std::string_view name);

struct SplitConfig {
  int seen_val_target = 100;
  int seen_test_target = 259;
  int min_per_type = 22;

  static SplitConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

struct LeakageReport {
  // Number of training notes containing each training action type.
  std::map<std::string, int> train_counts_per_type;
  int min_train_count = 0;
  bool min_per_type_ok = false;
  // True when no OOV-validation or OOV-test action appears in any train,
  // seen-val, or seen-test note.
  bool oov_actions_absent_from_seen = false;

  nlohmann::ordered_json to_json() const;
};

// Action-disjoint Seen/OOV partition of the corpus.
struct SplitManifest {
  std::vector<int> train_actions;     // 18 ids
  std::vector<int> oov_val_actions;   // 4 ids
  std::vector<int> oov_test_actions;  // 6 ids
  std::map<std::string, SplitId> assignment;
  LeakageReport leakage;

  std::vector<std::string> notes_in(SplitId s) const;
  SplitId split_of(const std::string& note_id) const;

  nlohmann::ordered_json to_json() const;
  static SplitManifest from_json(const nlohmann::ordered_json& j);
  static SplitManifest load(const std::string& path);
  void save(const std::string& path,
            const nlohmann::ordered_json& provenance) const;

  // Checks the four manifest invariants against the corpus. Throws
  // ValidationError on any violation.
  void check(const std::vector<Note>& notes, const Ontology& ontology) const;
};

SplitManifest make_splits(const std::vector<Note>& notes,
                          const Ontology& ontology, const SplitConfig& config,
                          std::uint64_t seed);

}  // namespace followup

#endif  // FOLLOWUP_SPLITS_HPP_
