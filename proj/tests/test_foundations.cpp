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

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "followup/dates.hpp"
#include "followup/errors.hpp"
#include "followup/rng.hpp"
#include "followup/tokenizer.hpp"

using namespace followup;

TEST_SUITE("rng") {
  TEST_CASE("splitmix64 matches the published reference sequence") {
    // Reference outputs for seed 0 from the original splitmix64 code.
    std::uint64_t s = 0;
    CHECK(splitmix64_next(s) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64_next(s) == 0x6E789E6AA1B965F4ULL);
    CHECK(splitmix64_next(s) == 0x06C45D188009454FULL);
  }

  TEST_CASE("derive_seed is deterministic and index-sensitive") {
    CHECK(derive_seed(42, 0) == derive_seed(42, 0));
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("xoshiro streams are reproducible") {
    Xoshiro256ss a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
      std::uint64_t x = a.next();
      all_equal = all_equal && (x == b.next());
      any_diff = any_diff || (x != c.next());
    }
    CHECK(all_equal);
    CHECK(any_diff);
  }

  TEST_CASE("below and unit stay in range") {
    Xoshiro256ss rng(9);
    for (int i = 0; i < 1000; ++i) {
      CHECK(rng.below(17) < 17);
      double u = rng.unit();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("shuffle permutes without losing elements") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    std::vector<int> orig = v;
    Xoshiro256ss rng(3);
    rng.shuffle(v);
    CHECK(v != orig);
    std::sort(v.begin(), v.end());
    CHECK(v == orig);
  }

  TEST_CASE("pick_weighted respects zero weights") {
    Xoshiro256ss rng(11);
    std::vector<double> w{0.0, 1.0, 0.0, 2.0};
    for (int i = 0; i < 200; ++i) {
      std::size_t k = rng.pick_weighted(w);
      CHECK((k == 1 || k == 3));
    }
  }

  TEST_CASE("fnv1a64 matches known vectors") {
    CHECK(fnv1a64("", 0) == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a", 1) == 0xAF63DC4C8601EC8CULL);
    CHECK(fnv1a64("foobar", 6) == 0x85944171F73967E8ULL);
  }
}

TEST_SUITE("dates") {
  TEST_CASE("iso parse and format round trip") {
    for (const char* s : {"2026-01-10", "2024-02-29", "1999-12-31"}) {
      CHECK(format_iso_date(parse_iso_date(s)) == s);
    }
  }

  TEST_CASE("malformed dates are rejected") {
    for (const char* s :
         {"2026-13-01", "2026-02-30", "2023-02-29", "20260110", "2026-1-1",
          "abcd-ef-gh", "", "2026-01-10x"}) {
      CHECK_THROWS_AS(parse_iso_date(s), ParseError);
    }
  }

  TEST_CASE("day arithmetic crosses month and leap boundaries") {
    CHECK(format_iso_date(add_days(parse_iso_date("2024-02-28"), 1)) ==
          "2024-02-29");
    CHECK(format_iso_date(add_days(parse_iso_date("2026-02-28"), 1)) ==
          "2026-03-01");
    CHECK(format_iso_date(add_days(parse_iso_date("2026-01-10"), 365)) ==
          "2027-01-10");
    CHECK(format_iso_date(add_days(parse_iso_date("2026-01-10"), -10)) ==
          "2025-12-31");
  }

  TEST_CASE("days_between inverts add_days") {
    Date base = parse_iso_date("2026-06-15");
    for (int d : {-400, -1, 0, 1, 14, 90, 365, 730}) {
      CHECK(days_between(base, add_days(base, d)) == d);
    }
  }
}

TEST_SUITE("tokenizer") {
  TEST_CASE("tokens map back into the text exactly") {
    std::string text = "Order MRI-Brain in 2 weeks (non-urgent).";
    auto toks = tokenize(text);
    for (const auto& t : toks) {
      CHECK(t.text == text.substr(t.start, t.end - t.start));
      CHECK(t.start < t.end);
    }
  }

  TEST_CASE("alphabetic runs, digit runs, and punctuation split") {
    auto toks = tokenize("q6mo, x2.");
    std::vector<std::string> words;
    for (const auto& t : toks) words.push_back(t.text);
    CHECK(words == std::vector<std::string>{"q", "6", "mo", ",", "x", "2", "."});
  }

  TEST_CASE("empty and whitespace-only input yields no tokens") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \n\t ").empty());
  }

  TEST_CASE("tokens are ordered and non-overlapping") {
    auto toks = tokenize("Follow-up in three to four weeks; RTC 3mo.");
    for (std::size_t i = 1; i < toks.size(); ++i) {
      CHECK(toks[i - 1].end <= toks[i].start);
    }
  }

  TEST_CASE("windows cover every token") {
    for (int n : {0, 1, 5, 100, 512, 513, 900, 2000}) {
      auto ws = make_windows(n, 512, 128);
      std::vector<bool> covered(n, false);
      for (const auto& w : ws) {
        CHECK(w.token_begin <= w.token_end);
        CHECK(w.token_end - w.token_begin <= 512);
        for (int t = w.token_begin; t < w.token_end; ++t) covered[t] = true;
      }
      if (n == 0) {
        // Empty input keeps a single empty window so downstream code can
        // always index window 0.
        REQUIRE(ws.size() == 1);
        CHECK(ws[0].token_begin == ws[0].token_end);
      } else {
        CHECK(std::all_of(covered.begin(), covered.end(),
                          [](bool b) { return b; }));
      }
    }
  }

  TEST_CASE("consecutive windows overlap by the stride") {
    auto ws = make_windows(1000, 512, 128);
    for (std::size_t i = 1; i < ws.size(); ++i) {
      CHECK(ws[i].token_begin == ws[i - 1].token_begin + (512 - 128));
    }
  }
}
