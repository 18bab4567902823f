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

#ifndef FOLLOWUP_ONTOLOGY_HPP_
#define FOLLOWUP_ONTOLOGY_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace followup {

inline constexpr int kNumActionLabels = 28;

enum class Specialty {
  kOrthopedic,
  kCardiopulmonary,
  kGastroenterology,
  kNeurology,
  kGeneralMedicine,
};
inline constexpr int kNumSpecialties = 5;

enum class ActionCategory {
  kImaging,
  kLabOrProceduralTest,
  kProcedure,
  kConsult,
  kRehabWellness,
};

std::string_view specialty_name(Specialty s);
Specialty specialty_from_name(std::string_view name);
std::string_view category_name(ActionCategory c);
ActionCategory category_from_name(std::string_view name);

// One canonical clinical action. Aliases are stored in display form; lookup
// goes through normalize_mention().
struct ActionLabel {
  int id = 0;
  std::string name;
  ActionCategory category = ActionCategory::kImaging;
  std::vector<Specialty> specialties;
  std::vector<std::string> aliases;
};

// Closed set of 28 canonical action labels plus the alias index mapping
// surface mentions to labels. Immutable after load; concurrent reads are
// safe.
class Ontology {
 public:
  static Ontology load(const std::string& path);
  static Ontology from_json(const nlohmann::ordered_json& j);

  nlohmann::ordered_json to_json() const;
  void save(const std::string& path) const;

  // Lowercase, collapse internal whitespace, strip leading/trailing
  // punctuation. No stemming, no fuzzy matching.
  static std::string normalize_mention(std::string_view mention);

  // Exact alias lookup after normalization; nullptr means no match.
  const ActionLabel* canonicalize(std::string_view mention) const;

  std::vector<const ActionLabel*> labels_for_specialty(Specialty s) const;

  const std::vector<ActionLabel>& labels() const { return labels_; }
  const ActionLabel& label(int id) const { return labels_.at(id); }
  const ActionLabel* by_name(std::string_view name) const;
  int size() const { return static_cast<int>(labels_.size()); }

 private:
  Ontology() = default;
  void build_index();

  std::vector<ActionLabel> labels_;
  std::unordered_map<std::string, int> alias_index_;  // normalized alias -> id
  std::unordered_map<std::string, int> name_index_;   // exact name -> id
};

// Path of the bundled ontology file under the data directory.
std::string default_ontology_path();

}  // namespace followup

#endif  // FOLLOWUP_ONTOLOGY_HPP_
