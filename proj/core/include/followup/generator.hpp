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

#ifndef FOLLOWUP_GENERATOR_HPP_
#define FOLLOWUP_GENERATOR_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "json.hpp"

namespace followup {

// Surface templates for note assembly, shipped as a data file so the full
// surface grammar is auditable without reading code.
struct TemplateSet {
  struct TimeTemplate {
    std::string pattern;
    std::string role;                // adverbial | noun | clause
    std::vector<std::string> units;  // empty = any unit the pattern allows
  };

  std::vector<std::string> patient_names;
  std::vector<std::string> provider_names;
  std::vector<std::string> header_templates;
  std::map<std::string, std::vector<std::string>> hpi_openers;  // by specialty
  std::vector<std::string> hpi_extra;
  std::vector<std::string> historical_distractors;
  std::vector<std::string> exam_sentences;
  std::vector<std::string> filler_sentences;
  std::vector<std::string> plan_headers;
  std::vector<std::string> item_templates_adverbial;
  std::vector<std::string> item_templates_time_first;
  std::vector<std::string> item_templates_noun;
  std::vector<std::string> item_templates_clause;
  std::vector<std::string> untimed_action_templates;
  std::vector<std::string> zero_action_plan_sentences;
  std::map<std::string, std::vector<TimeTemplate>> time_templates;  // by family
  std::vector<std::string> offset_zero_phrases;
  std::vector<std::string> offset_one_phrases;

  static TemplateSet load(const std::string& path);
  void validate() const;
};

std::string default_templates_path();

struct OffsetPoolEntry {
  int days = 0;
  double weight = 1.0;
};

struct GeneratorConfig {
  int n_notes = 2000;
  // P(0 items), P(1 item), P(2 items).
  std::array<double, 3> item_count_probs{0.25, 0.49, 0.26};
  double extra_untimed_action_prob = 0.05;
  double historical_distractor_prob = 0.5;
  Date date_min{};  // defaults set in defaults()
  Date date_max{};
  std::vector<OffsetPoolEntry> offset_pool;
  int min_chars = 436;
  int max_chars = 1834;

  static GeneratorConfig defaults();
  static GeneratorConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

// Deterministic given (config, seed); each note is generated from an
// independent child stream so per-note generation order is irrelevant.
std::vector<Note> generate_corpus(const GeneratorConfig& config,
                                  const Ontology& ontology,
                                  const TemplateSet& templates,
                                  std::uint64_t seed);

struct StatsReport {
  int n_notes = 0;
  std::map<std::string, int> notes_per_specialty;
  std::array<int, 3> item_count_histogram{0, 0, 0};
  int length_min = 0;
  int length_median = 0;
  int length_max = 0;
  int distinct_time_surfaces = 0;
  int total_action_mentions = 0;
  std::vector<std::pair<std::string, int>> top_actions;       // descending
  std::vector<std::pair<std::string, int>> top_time_phrases;  // descending
  double multi_action_fraction = 0.0;
  double zero_action_fraction = 0.0;
  double historical_mention_fraction = 0.0;
  std::map<std::string, int> plan_header_counts;

  nlohmann::ordered_json to_json() const;
};

StatsReport corpus_stats(const std::vector<Note>& notes,
                         const TemplateSet& templates, int top_k = 15);

}  // namespace followup

#endif  // FOLLOWUP_GENERATOR_HPP_
