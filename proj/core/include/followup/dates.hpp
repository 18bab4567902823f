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

#ifndef FOLLOWUP_DATES_HPP_
#define FOLLOWUP_DATES_HPP_

#include <chrono>
#include <string>
#include <string_view>

namespace followup {

// Proleptic-Gregorian calendar date. Thin wrapper over std::chrono.
using Date = std::chrono::year_month_day;

// Parses "YYYY-MM-DD". Throws ParseError on malformed or non-existent dates.
Date parse_iso_date(std::string_view s);

std::string format_iso_date(const Date& d);

Date add_days(const Date& d, int days);

// Days from `from` to `to` (positive when `to` is later).
int days_between(const Date& from, const Date& to);

}  // namespace followup

#endif  // FOLLOWUP_DATES_HPP_
