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

#include "followup/dates.hpp"

#include <cstdio>

#include "followup/errors.hpp"

namespace followup {

Date parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    throw ParseError("malformed ISO date: \"" + std::string(s) + "\"");
  }
  auto digits = [&](int begin, int end) {
    int v = 0;
    for (int i = begin; i < end; ++i) {
      char c = s[i];
      if (c < '0' || c > '9') {
        throw ParseError("malformed ISO date: \"" + std::string(s) + "\"");
      }
      v = v * 10 + (c - '0');
    }
    return v;
  };
  Date d{std::chrono::year{digits(0, 4)},
         std::chrono::month{static_cast<unsigned>(digits(5, 7))},
         std::chrono::day{static_cast<unsigned>(digits(8, 10))}};
  if (!d.ok()) {
    throw ParseError("non-existent calendar date: \"" + std::string(s) + "\"");
  }
  return d;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(d.year()),
                unsigned(d.month()), unsigned(d.day()));
  return buf;
}

Date add_days(const Date& d, int days) {
  return Date{std::chrono::sys_days(d) + std::chrono::days(days)};
}

int days_between(const Date& from, const Date& to) {
  return static_cast<int>(
      (std::chrono::sys_days(to) - std::chrono::sys_days(from)).count());
}

}  // namespace followup
