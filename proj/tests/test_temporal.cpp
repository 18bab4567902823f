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

#include <string>
#include <vector>

#include "doctest.h"
#include "followup/errors.hpp"
#include "followup/temporal.hpp"

using namespace followup;

namespace {

struct Vector {
  const char* phrase;
  int offset;
  const char* rule;
};

// Frozen oracle table: each offset was computed by hand from the closed
// unit table (day 1, week 7, month 30, year 365) before the grammar was
// implemented.
const std::vector<Vector> kVectors = {
    {"today", 0, "today"},
    {"tomorrow", 1, "tomorrow"},
    {"Tomorrow.", 1, "tomorrow"},
    {"in 2 weeks", 14, "in_n_unit"},
    {"in 1 day", 1, "in_n_unit"},
    {"within 10 days", 10, "in_n_unit"},
    {"after 3 months", 90, "in_n_unit"},
    {"in a week", 7, "in_n_unit"},
    {"in an hour", -1, ""},  // no such unit
    {"in two months", 60, "in_n_unit"},
    {"in approximately two months", 60, "in_n_unit"},
    {"in about 6 weeks", 42, "in_n_unit"},
    {"in roughly one year", 365, "in_n_unit"},
    {"IN 2 WEEKS", 14, "in_n_unit"},
    {"ten mos", 300, "n_unit"},
    {"6 wks", 42, "n_unit"},
    {"ninety days", 90, "n_unit"},
    {"2 weeks from today", 14, "n_unit_from_today"},
    {"three months from today", 90, "n_unit_from_today"},
    {"9-week follow-up", 63, "followup_noun"},
    {"2 month follow up", 60, "followup_noun"},
    {"follow up in 6 weeks", 42, "followup_in"},
    {"follow-up in twelve weeks", 84, "followup_in"},
    {"RTC 3mo", 90, "rtc"},
    {"rtc in 2 weeks", 14, "rtc"},
    {"RTC 10 days", 10, "rtc"},
    {"q6mo", 180, "in_n_unit"},
    {"q12w", 84, "in_n_unit"},
    {"x2w", 14, "in_n_unit"},
    {"x30d", 30, "in_n_unit"},
    {"1 yr", 365, "n_unit"},
    {"twenty days", 20, "n_unit"},
    {"", -1, ""},
    {"soon", -1, ""},
    {"next week", -1, ""},       // outside the closed grammar
    {"in a few weeks", -1, ""},  // vague counts never guess
    {"yesterday", -1, ""},       // past references are not offsets
    {"in 2", -1, ""},
    {"weeks 2 in", -1, ""},
    {"in 2 fortnights", -1, ""},
};

}  // namespace

TEST_SUITE("temporal") {
  TEST_CASE("unit multipliers are the fixed closed table") {
    CHECK(unit_multiplier(TimeUnit::kDay) == 1);
    CHECK(unit_multiplier(TimeUnit::kWeek) == 7);
    CHECK(unit_multiplier(TimeUnit::kMonth) == 30);
    CHECK(unit_multiplier(TimeUnit::kYear) == 365);
    CHECK(unit_multiplier(TimeUnit::kLiteral) == 1);
  }

  TEST_CASE("oracle vectors") {
    for (const Vector& v : kVectors) {
      CAPTURE(v.phrase);
      auto t = try_normalize(v.phrase);
      if (v.offset < 0) {
        CHECK(!t.has_value());
        CHECK_THROWS_AS(normalize(v.phrase), NormalizationError);
      } else {
        REQUIRE(t.has_value());
        CHECK(t->offset_days == v.offset);
        CHECK(t->matched_rule == v.rule);
        CHECK(t->input == v.phrase);
        // Trace arithmetic must be internally consistent.
        CHECK(t->resolved_number * unit_multiplier(t->unit) == t->offset_days);
      }
    }
  }

  TEST_CASE("normalization failure carries the phrase") {
    try {
      normalize("whenever convenient");
      FAIL("expected NormalizationError");
    } catch (const NormalizationError& e) {
      CHECK(e.phrase() == "whenever convenient");
    }
  }

  TEST_CASE("trace json round trip") {
    NormalizationTrace t = normalize("in 2 weeks");
    NormalizationTrace back = NormalizationTrace::from_json(t.to_json());
    CHECK(back.input == t.input);
    CHECK(back.matched_rule == t.matched_rule);
    CHECK(back.resolved_number == t.resolved_number);
    CHECK(back.unit == t.unit);
    CHECK(back.offset_days == t.offset_days);
  }

  TEST_CASE("offset and date arithmetic invert each other") {
    Date anchor = parse_iso_date("2026-01-10");
    CHECK(format_iso_date(offset_to_date(anchor, 14)) == "2026-01-24");
    CHECK(date_to_offset(anchor, parse_iso_date("2026-01-24")) == 14);
    CHECK(date_to_offset(anchor, parse_iso_date("2026-01-03")) == -7);
    for (int d : {-30, 0, 1, 63, 365}) {
      CHECK(date_to_offset(anchor, offset_to_date(anchor, d)) == d);
    }
  }

  TEST_CASE("rule table dump covers the grammar") {
    auto j = rule_table_json();
    CHECK(j.contains("rules"));
    std::vector<std::string> ids;
    for (const auto& r : j["rules"]) ids.push_back(r["id"].get<std::string>());
    for (const char* want : {"today", "tomorrow", "n_unit", "in_n_unit",
                             "n_unit_from_today", "followup_noun",
                             "followup_in", "rtc"}) {
      CHECK(std::find(ids.begin(), ids.end(), want) != ids.end());
    }
    CHECK(j["written_numbers"]["ten"] == 10);
    CHECK(j["unit_words"]["mos"] == "month");
    CHECK(j["unit_multipliers"]["month"] == 30);
  }
}
