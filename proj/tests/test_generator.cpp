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

#include <set>
#include <string>

#include "doctest.h"
#include "followup/errors.hpp"
#include "followup/generator.hpp"
#include "followup/note.hpp"
#include "followup/temporal.hpp"
#include "test_util.hpp"

using namespace followup;

TEST_SUITE("generator") {
  TEST_CASE("generation is deterministic in (config, seed)") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.n_notes = 40;
    auto a = generate_corpus(cfg, testutil::ontology(), testutil::templates(), 9);
    auto b = generate_corpus(cfg, testutil::ontology(), testutil::templates(), 9);
    auto c = generate_corpus(cfg, testutil::ontology(), testutil::templates(), 10);
    REQUIRE(a.size() == b.size());
    bool identical = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      identical = identical && (a[i].to_json() == b[i].to_json());
    }
    CHECK(identical);
    bool differs = false;
    for (std::size_t i = 0; i < a.size() && i < c.size(); ++i) {
      differs = differs || (a[i].to_json() != c[i].to_json());
    }
    CHECK(differs);
  }

  TEST_CASE("every note passes full validation against the ontology") {
    for (const Note& n : testutil::small_corpus()) {
      CHECK_NOTHROW(n.validate(&testutil::ontology()));
    }
  }

  TEST_CASE("entity surfaces are verbatim text slices") {
    for (const Note& n : testutil::small_corpus()) {
      for (const EntitySpan& e : n.entities) {
        REQUIRE(e.start >= 0);
        REQUIRE(e.end <= static_cast<int>(n.text.size()));
        CHECK(n.text.substr(e.start, e.end - e.start) == e.surface);
      }
    }
  }

  TEST_CASE("links reference real entities of the right kinds") {
    for (const Note& n : testutil::small_corpus()) {
      for (const ScheduledForLink& l : n.links) {
        const EntitySpan* test = n.entity(l.test_entity_id);
        REQUIRE(test != nullptr);
        CHECK(test->kind == EntityKind::kTest);
        if (l.time_entity_id) {
          const EntitySpan* time = n.entity(*l.time_entity_id);
          REQUIRE(time != nullptr);
          CHECK(time->kind == EntityKind::kTime);
        }
      }
    }
  }

  TEST_CASE("gold pairs stay within the item-count bound") {
    for (const Note& n : testutil::small_corpus()) {
      CHECK(n.pairs.size() <= 2);
    }
  }

  TEST_CASE("every linked time surface normalizes") {
    for (const Note& n : testutil::small_corpus()) {
      for (const ScheduledForLink& l : n.links) {
        if (!l.time_entity_id) continue;
        const EntitySpan* time = n.entity(*l.time_entity_id);
        REQUIRE(time != nullptr);
        CHECK(try_normalize(time->surface).has_value());
      }
    }
  }

  TEST_CASE("note lengths respect the configured band") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    for (const Note& n : testutil::small_corpus()) {
      int len = static_cast<int>(n.text.size());
      CHECK(len >= cfg.min_chars);
      CHECK(len <= cfg.max_chars);
    }
  }

  TEST_CASE("note ids are unique and dates lie in the window") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    std::set<std::string> ids;
    for (const Note& n : testutil::small_corpus()) {
      CHECK(ids.insert(n.id).second);
      CHECK(days_between(cfg.date_min, n.visit_date) >= 0);
      CHECK(days_between(n.visit_date, cfg.date_max) >= 0);
    }
  }

  TEST_CASE("corpus jsonl round trips through disk") {
    auto tmp = testutil::temp_file("followup_corpus_roundtrip.jsonl");
    const auto& notes = testutil::small_corpus();
    write_corpus_jsonl(tmp.string(), notes, {{"provenance", "test"}});
    auto back = read_corpus_jsonl(tmp.string());
    REQUIRE(back.size() == notes.size());
    bool identical = true;
    for (std::size_t i = 0; i < notes.size(); ++i) {
      identical = identical && (back[i].to_json() == notes[i].to_json());
    }
    CHECK(identical);
  }

  TEST_CASE("note json round trip") {
    const Note& n = testutil::small_corpus().front();
    CHECK(Note::from_json(n.to_json()).to_json() == n.to_json());
  }

  TEST_CASE("stats report internal consistency") {
    const auto& notes = testutil::small_corpus();
    StatsReport st = corpus_stats(notes, testutil::templates());
    CHECK(st.n_notes == static_cast<int>(notes.size()));
    int hist_total = st.item_count_histogram[0] + st.item_count_histogram[1] +
                     st.item_count_histogram[2];
    CHECK(hist_total == st.n_notes);
    int per_specialty = 0;
    for (const auto& [name, count] : st.notes_per_specialty) {
      per_specialty += count;
    }
    CHECK(per_specialty == st.n_notes);
    CHECK(st.length_min <= st.length_median);
    CHECK(st.length_median <= st.length_max);
    CHECK(st.zero_action_fraction ==
          doctest::Approx(st.item_count_histogram[0] /
                          static_cast<double>(st.n_notes)));
  }

  TEST_CASE("invalid configs are rejected") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.item_count_probs = {0.5, 0.4, 0.2};  // does not sum to 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GeneratorConfig::defaults();
    cfg.n_notes = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GeneratorConfig::defaults();
    cfg.max_chars = cfg.min_chars - 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}
