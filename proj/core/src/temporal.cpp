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

#include "followup/temporal.hpp"

#include <cctype>
#include <map>
#include <vector>

#include "followup/errors.hpp"

namespace followup {

namespace {

const std::map<std::string, long, std::less<>> kWrittenNumbers = {
    {"a", 1},        {"an", 1},       {"one", 1},      {"two", 2},
    {"three", 3},    {"four", 4},     {"five", 5},     {"six", 6},
    {"seven", 7},    {"eight", 8},    {"nine", 9},     {"ten", 10},
    {"eleven", 11},  {"twelve", 12},  {"thirteen", 13},{"fourteen", 14},
    {"fifteen", 15}, {"sixteen", 16}, {"seventeen", 17},{"eighteen", 18},
    {"nineteen", 19},{"twenty", 20},  {"thirty", 30},  {"sixty", 60},
    {"ninety", 90}};

// Unit word and abbreviation forms, all mapping to a canonical unit.
const std::map<std::string, TimeUnit, std::less<>> kUnitWords = {
    {"day", TimeUnit::kDay},     {"days", TimeUnit::kDay},
    {"d", TimeUnit::kDay},
    {"week", TimeUnit::kWeek},   {"weeks", TimeUnit::kWeek},
    {"w", TimeUnit::kWeek},      {"wk", TimeUnit::kWeek},
    {"wks", TimeUnit::kWeek},
    {"month", TimeUnit::kMonth}, {"months", TimeUnit::kMonth},
    {"m", TimeUnit::kMonth},     {"mo", TimeUnit::kMonth},
    {"mos", TimeUnit::kMonth},
    {"year", TimeUnit::kYear},   {"years", TimeUnit::kYear},
    {"y", TimeUnit::kYear},      {"yr", TimeUnit::kYear},
    {"yrs", TimeUnit::kYear}};

// Fuzzy hedges stripped before rule lookup.
const std::vector<std::string> kFuzzyModifiers = {"approximately", "about",
                                                  "roughly", "around"};

bool is_fuzzy(std::string_view tok) {
  for (const auto& f : kFuzzyModifiers) {
    if (tok == f) return true;
  }
  return false;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Lowercase, split on whitespace and hyphens, strip punctuation at token
// edges. "9-week follow-up." -> {"9", "week", "follow", "up"}.
std::vector<std::string> base_tokens(std::string_view phrase) {
  std::vector<std::string> toks;
  std::string cur;
  auto flush = [&] {
    // strip edge punctuation
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) toks.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char raw : phrase) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c) || raw == '-' || raw == '/') {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return toks;
}

// Rewrites glued shorthand tokens:
//   q6mo -> in 6 month   x2w -> in 2 week   3mo -> 3 month
// and drops fuzzy modifiers. Unit abbreviations stay as-is; they are
// resolved through kUnitWords at match time.
std::vector<std::string> expand_tokens(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const std::string& tok : in) {
    if (is_fuzzy(tok)) continue;
    if (all_digits(tok)) {
      out.push_back(tok);
      continue;
    }
    // qN<unit> / xN<unit> / N<unit>
    std::size_t i = 0;
    bool prefixed = false;
    if (tok.size() > 1 && (tok[0] == 'q' || tok[0] == 'x') &&
        std::isdigit(static_cast<unsigned char>(tok[1]))) {
      prefixed = true;
      i = 1;
    }
    std::size_t digit_begin = i;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
      ++i;
    }
    if (i > digit_begin && i < tok.size() &&
        kUnitWords.count(std::string_view(tok).substr(i)) > 0) {
      if (prefixed) out.push_back("in");
      out.push_back(tok.substr(digit_begin, i - digit_begin));
      out.push_back(tok.substr(i));
      continue;
    }
    out.push_back(tok);
  }
  return out;
}

struct NumberUnit {
  long n;
  TimeUnit unit;
};

// Parses tokens[i] as a number (digits or written) and tokens[i+1] as a
// unit word.
std::optional<NumberUnit> match_number_unit(
    const std::vector<std::string>& toks, std::size_t i) {
  if (i + 1 >= toks.size()) return std::nullopt;
  long n;
  if (all_digits(toks[i])) {
    if (toks[i].size() > 9) return std::nullopt;
    n = std::stol(toks[i]);
  } else {
    auto it = kWrittenNumbers.find(toks[i]);
    if (it == kWrittenNumbers.end()) return std::nullopt;
    n = it->second;
  }
  auto uit = kUnitWords.find(toks[i + 1]);
  if (uit == kUnitWords.end()) return std::nullopt;
  return NumberUnit{n, uit->second};
}

NormalizationTrace make_trace(std::string_view input, std::string rule,
                              long n, TimeUnit unit) {
  NormalizationTrace t;
  t.input = std::string(input);
  t.matched_rule = std::move(rule);
  t.resolved_number = n;
  t.unit = unit;
  t.offset_days = static_cast<int>(n * unit_multiplier(unit));
  return t;
}

}  // namespace

std::string_view time_unit_name(TimeUnit u) {
  switch (u) {
    case TimeUnit::kDay: return "day";
    case TimeUnit::kWeek: return "week";
    case TimeUnit::kMonth: return "month";
    case TimeUnit::kYear: return "year";
    case TimeUnit::kLiteral: return "literal";
  }
  return "literal";
}

int unit_multiplier(TimeUnit u) {
  switch (u) {
    case TimeUnit::kDay: return 1;
    case TimeUnit::kWeek: return 7;
    case TimeUnit::kMonth: return 30;
    case TimeUnit::kYear: return 365;
    case TimeUnit::kLiteral: return 1;
  }
  return 1;
}

nlohmann::ordered_json NormalizationTrace::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  j["matched_rule"] = matched_rule;
  j["resolved_number"] = resolved_number;
  j["unit"] = std::string(time_unit_name(unit));
  j["offset_days"] = offset_days;
  return j;
}

NormalizationTrace NormalizationTrace::from_json(
    const nlohmann::ordered_json& j) {
  NormalizationTrace t;
  t.input = j.at("input").get<std::string>();
  t.matched_rule = j.at("matched_rule").get<std::string>();
  t.resolved_number = j.at("resolved_number").get<long>();
  std::string u = j.at("unit").get<std::string>();
  if (u == "day") t.unit = TimeUnit::kDay;
  else if (u == "week") t.unit = TimeUnit::kWeek;
  else if (u == "month") t.unit = TimeUnit::kMonth;
  else if (u == "year") t.unit = TimeUnit::kYear;
  else t.unit = TimeUnit::kLiteral;
  t.offset_days = j.at("offset_days").get<int>();
  return t;
}

std::optional<NormalizationTrace> try_normalize(std::string_view phrase) {
  if (phrase.empty()) return std::nullopt;
  std::vector<std::string> toks = expand_tokens(base_tokens(phrase));
  if (toks.empty()) return std::nullopt;

  if (toks.size() == 1) {
    if (toks[0] == "today") {
      return make_trace(phrase, "today", 0, TimeUnit::kLiteral);
    }
    if (toks[0] == "tomorrow") {
      return make_trace(phrase, "tomorrow", 1, TimeUnit::kLiteral);
    }
  }

  // bare N UNIT   ("ten mos", "6 weeks")
  if (toks.size() == 2) {
    if (auto nu = match_number_unit(toks, 0)) {
      return make_trace(phrase, "n_unit", nu->n, nu->unit);
    }
  }
  // in/within/after N UNIT
  if (toks.size() == 3 &&
      (toks[0] == "in" || toks[0] == "within" || toks[0] == "after")) {
    if (auto nu = match_number_unit(toks, 1)) {
      return make_trace(phrase, "in_n_unit", nu->n, nu->unit);
    }
  }
  // N UNIT from today
  if (toks.size() == 4 && toks[2] == "from" && toks[3] == "today") {
    if (auto nu = match_number_unit(toks, 0)) {
      return make_trace(phrase, "n_unit_from_today", nu->n, nu->unit);
    }
  }
  // N UNIT follow up   ("9-week follow-up")
  if (toks.size() == 4 && toks[2] == "follow" && toks[3] == "up") {
    if (auto nu = match_number_unit(toks, 0)) {
      return make_trace(phrase, "followup_noun", nu->n, nu->unit);
    }
  }
  // follow up in N UNIT
  if (toks.size() == 5 && toks[0] == "follow" && toks[1] == "up" &&
      toks[2] == "in") {
    if (auto nu = match_number_unit(toks, 3)) {
      return make_trace(phrase, "followup_in", nu->n, nu->unit);
    }
  }
  // rtc N UNIT   (return to clinic; "RTC 3mo" arrives here after expansion
  // as {"rtc", "in", "3", "mo"} or {"rtc", "3", "mo"})
  if (toks.size() >= 2 && toks[0] == "rtc") {
    std::size_t i = (toks.size() >= 3 && toks[1] == "in") ? 2 : 1;
    if (toks.size() == i + 2) {
      if (auto nu = match_number_unit(toks, i)) {
        return make_trace(phrase, "rtc", nu->n, nu->unit);
      }
    }
  }
  return std::nullopt;
}

NormalizationTrace normalize(std::string_view phrase) {
  auto t = try_normalize(phrase);
  if (!t) throw NormalizationError(std::string(phrase));
  return *t;
}

Date offset_to_date(const Date& anchor, int offset_days) {
  return add_days(anchor, offset_days);
}

int date_to_offset(const Date& anchor, const Date& d) {
  return days_between(anchor, d);
}

nlohmann::ordered_json rule_table_json() {
  nlohmann::ordered_json j;
  j["normalization"] = {
      "lowercase", "split on whitespace and hyphens",
      "strip token-edge punctuation", "drop fuzzy modifiers",
      "expand glued shorthand (q6mo, x2w, 3mo)"};
  j["fuzzy_modifiers"] = kFuzzyModifiers;
  j["written_numbers"] = nlohmann::ordered_json::object();
  for (const auto& [word, n] : kWrittenNumbers) j["written_numbers"][word] = n;
  j["unit_words"] = nlohmann::ordered_json::object();
  for (const auto& [word, unit] : kUnitWords) {
    j["unit_words"][word] = std::string(time_unit_name(unit));
  }
  j["unit_multipliers"] = {{"day", 1}, {"week", 7}, {"month", 30},
                           {"year", 365}, {"literal", 1}};
  j["rules"] = nlohmann::ordered_json::array();
  auto rule = [&](const char* id, const char* pattern, const char* offset) {
    j["rules"].push_back({{"id", id}, {"pattern", pattern}, {"offset", offset}});
  };
  rule("today", "today", "0");
  rule("tomorrow", "tomorrow", "1");
  rule("n_unit", "N UNIT", "N * multiplier(UNIT)");
  rule("in_n_unit", "(in|within|after) N UNIT", "N * multiplier(UNIT)");
  rule("n_unit_from_today", "N UNIT from today", "N * multiplier(UNIT)");
  rule("followup_noun", "N UNIT follow up", "N * multiplier(UNIT)");
  rule("followup_in", "follow up in N UNIT", "N * multiplier(UNIT)");
  rule("rtc", "rtc [in] N UNIT", "N * multiplier(UNIT)");
  return j;
}

}  // namespace followup
