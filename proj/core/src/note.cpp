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

#include "followup/note.hpp"

#include <algorithm>
#include <fstream>

#include "followup/errors.hpp"
#include "followup/temporal.hpp"

namespace followup {

const EntitySpan* Note::entity(int entity_id) const {
  for (const EntitySpan& e : entities) {
    if (e.entity_id == entity_id) return &e;
  }
  return nullptr;
}

nlohmann::ordered_json Note::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["text"] = text;
  j["visit_date"] = format_iso_date(visit_date);
  j["specialty"] = specialty_name(specialty);
  j["entities"] = nlohmann::ordered_json::array();
  for (const EntitySpan& e : entities) {
    j["entities"].push_back(
        {{"entity_id", e.entity_id},
         {"kind", e.kind == EntityKind::kTest ? "TEST" : "TIME"},
         {"start", e.start},
         {"end", e.end},
         {"surface", e.surface}});
  }
  j["links"] = nlohmann::ordered_json::array();
  for (const ScheduledForLink& l : links) {
    nlohmann::ordered_json lj;
    lj["test_entity_id"] = l.test_entity_id;
    if (l.time_entity_id) {
      lj["time_entity_id"] = *l.time_entity_id;
    } else {
      lj["time_entity_id"] = nullptr;
    }
    j["links"].push_back(std::move(lj));
  }
  j["pairs"] = nlohmann::ordered_json::array();
  for (const CanonicalPair& p : pairs) {
    j["pairs"].push_back({{"action", p.action}, {"days_offset", p.days_offset}});
  }
  return j;
}

Note Note::from_json(const nlohmann::ordered_json& j) {
  Note n;
  n.id = j.at("id").get<std::string>();
  n.text = j.at("text").get<std::string>();
  n.visit_date = parse_iso_date(j.at("visit_date").get<std::string>());
  n.specialty = specialty_from_name(j.at("specialty").get<std::string>());
  for (const auto& ej : j.at("entities")) {
    EntitySpan e;
    e.entity_id = ej.at("entity_id").get<int>();
    std::string kind = ej.at("kind").get<std::string>();
    if (kind == "TEST") {
      e.kind = EntityKind::kTest;
    } else if (kind == "TIME") {
      e.kind = EntityKind::kTime;
    } else {
      throw ParseError("unknown entity kind: \"" + kind + "\"");
    }
    e.start = ej.at("start").get<int>();
    e.end = ej.at("end").get<int>();
    e.surface = ej.at("surface").get<std::string>();
    n.entities.push_back(std::move(e));
  }
  for (const auto& lj : j.at("links")) {
    ScheduledForLink l;
    l.test_entity_id = lj.at("test_entity_id").get<int>();
    if (!lj.at("time_entity_id").is_null()) {
      l.time_entity_id = lj.at("time_entity_id").get<int>();
    }
    n.links.push_back(l);
  }
  for (const auto& pj : j.at("pairs")) {
    n.pairs.insert({pj.at("action").get<std::string>(),
                    pj.at("days_offset").get<int>()});
  }
  return n;
}

void Note::validate(const Ontology* ontology) const {
  const int len = static_cast<int>(text.size());
  std::vector<std::pair<int, int>> ranges;
  for (const EntitySpan& e : entities) {
    if (!(0 <= e.start && e.start < e.end && e.end <= len)) {
      throw ValidationError("note " + id + ": span out of bounds");
    }
    if (text.substr(e.start, e.end - e.start) != e.surface) {
      throw ValidationError("note " + id + ": span text mismatch at " +
                            std::to_string(e.start));
    }
    ranges.emplace_back(e.start, e.end);
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) {
      throw ValidationError("note " + id + ": overlapping entity spans");
    }
  }
  if (pairs.size() > 2) {
    throw ValidationError("note " + id + ": more than two gold pairs");
  }
  for (const ScheduledForLink& l : links) {
    const EntitySpan* test = entity(l.test_entity_id);
    if (!test || test->kind != EntityKind::kTest) {
      throw ValidationError("note " + id + ": link test id does not refer "
                            "to a TEST span");
    }
    if (l.time_entity_id) {
      const EntitySpan* time = entity(*l.time_entity_id);
      if (!time || time->kind != EntityKind::kTime) {
        throw ValidationError("note " + id + ": link time id does not refer "
                              "to a TIME span");
      }
    }
  }
  if (ontology) {
    std::set<CanonicalPair> derived;
    for (const ScheduledForLink& l : links) {
      const EntitySpan* test = entity(l.test_entity_id);
      const ActionLabel* label = ontology->canonicalize(test->surface);
      if (!label) {
        throw ValidationError("note " + id + ": gold TEST surface \"" +
                              test->surface + "\" does not canonicalize");
      }
      if (!l.time_entity_id) continue;
      const EntitySpan* time = entity(*l.time_entity_id);
      auto trace = try_normalize(time->surface);
      if (!trace) {
        throw ValidationError("note " + id + ": gold TIME surface \"" +
                              time->surface + "\" does not normalize");
      }
      derived.insert({label->name, trace->offset_days});
    }
    if (derived != pairs) {
      throw ValidationError("note " + id +
                            ": gold pairs are not derivable from entities "
                            "and links");
    }
  }
}

void write_corpus_jsonl(const std::string& path,
                        const std::vector<Note>& notes,
                        const nlohmann::ordered_json& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);
  nlohmann::ordered_json header;
  header["provenance"] = provenance;
  out << header.dump() << "\n";
  for (const Note& n : notes) out << n.to_json().dump() << "\n";
}

std::vector<Note> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<Note> notes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": malformed JSON at line " +
                       std::to_string(line_no) + ": " + e.what());
    }
    if (line_no == 1 && j.is_object() && j.contains("provenance")) continue;
    try {
      notes.push_back(Note::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": bad note record at line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
  return notes;
}

}  // namespace followup
