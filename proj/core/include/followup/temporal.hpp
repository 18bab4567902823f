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

#ifndef FOLLOWUP_TEMPORAL_HPP_
#define FOLLOWUP_TEMPORAL_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "followup/dates.hpp"
#include "json.hpp"

// Deterministic normalization of time phrases to integer day offsets.
// The grammar is closed and purely relative: "in 2 weeks" is 14 days no
// matter the anchor, with fixed 30-day months and 365-day years. Unmatched
// phrases are a hard error, never a guess.

namespace followup {

enum class TimeUnit { kDay, kWeek, kMonth, kYear, kLiteral };

std::string_view time_unit_name(TimeUnit u);

// Days per unit: day 1, week 7, month 30, year 365, literal 1.
int unit_multiplier(TimeUnit u);

struct NormalizationTrace {
  std::string input;
  std::string matched_rule;
  long resolved_number = 0;
  TimeUnit unit = TimeUnit::kLiteral;
  int offset_days = 0;

  nlohmann::ordered_json to_json() const;
  static NormalizationTrace from_json(const nlohmann::ordered_json& j);
};

// Returns the trace, or nullopt when no rule matches.
std::optional<NormalizationTrace> try_normalize(std::string_view phrase);

// As try_normalize but throws NormalizationError on failure.
NormalizationTrace normalize(std::string_view phrase);

// Anchor arithmetic. Offsets themselves are anchor-independent; these two
// translate between offsets and calendar dates.
Date offset_to_date(const Date& anchor, int offset_days);
int date_to_offset(const Date& anchor, const Date& d);

// Audit dump of the full rule grammar: patterns, units, multipliers,
// written-number lexicon, and shorthand expansions.
nlohmann::ordered_json rule_table_json();

}  // namespace followup

#endif  // FOLLOWUP_TEMPORAL_HPP_
