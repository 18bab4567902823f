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

#include "followup/splits.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "followup/errors.hpp"
#include "followup/rng.hpp"

namespace followup {

namespace {

constexpr std::string_view kSplitNames[] = {"train",     "seen_val",
                                            "oov_val",   "seen_test",
                                            "oov_test",  "discarded"};

// Canonical action-id set of a note: every TEST entity's label, including
// untimed ones.
std::set<int> note_action_ids(const Note& note, const Ontology& ontology) {
  std::set<int> ids;
  for (const EntitySpan& e : note.entities) {
    if (e.kind != EntityKind::kTest) continue;
    const ActionLabel* label = ontology.canonicalize(e.surface);
    if (!label) {
      throw ValidationError("note " + note.id + ": TEST surface \"" +
                            e.surface + "\" does not canonicalize");
    }
    ids.insert(label->id);
  }
  return ids;
}

bool subset_of(const std::set<int>& a, const std::set<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::string_view split_name(SplitId s) {
  return kSplitNames[static_cast<int>(s)];
}

SplitId split_from_name(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kSplitNames[i] == name) return static_cast<SplitId>(i);
  }
  throw ParseError("unknown split name: \"" + std::string(name) + "\"");
}

SplitConfig SplitConfig::from_json(const nlohmann::ordered_json& j) {
  SplitConfig c;
  if (j.contains("seen_val_target")) {
    c.seen_val_target = j["seen_val_target"].get<int>();
  }
  if (j.contains("seen_test_target")) {
    c.seen_test_target = j["seen_test_target"].get<int>();
  }
  if (j.contains("min_per_type")) c.min_per_type = j["min_per_type"].get<int>();
  return c;
}

nlohmann::ordered_json SplitConfig::to_json() const {
  return {{"seen_val_target", seen_val_target},
          {"seen_test_target", seen_test_target},
          {"min_per_type", min_per_type}};
}

nlohmann::ordered_json LeakageReport::to_json() const {
  nlohmann::ordered_json j;
  j["train_counts_per_type"] = train_counts_per_type;
  j["min_train_count"] = min_train_count;
  j["min_per_type_ok"] = min_per_type_ok;
  j["oov_actions_absent_from_seen"] = oov_actions_absent_from_seen;
  return j;
}

std::vector<std::string> SplitManifest::notes_in(SplitId s) const {
  std::vector<std::string> out;
  for (const auto& [id, sid] : assignment) {
    if (sid == s) out.push_back(id);
  }
  return out;
}

SplitId SplitManifest::split_of(const std::string& note_id) const {
  auto it = assignment.find(note_id);
  if (it == assignment.end()) {
    throw UnknownNoteId("note id not in split manifest: " + note_id);
  }
  return it->second;
}

nlohmann::ordered_json SplitManifest::to_json() const {
  nlohmann::ordered_json j;
  j["train_actions"] = train_actions;
  j["oov_val_actions"] = oov_val_actions;
  j["oov_test_actions"] = oov_test_actions;
  j["assignment"] = nlohmann::ordered_json::object();
  for (const auto& [id, sid] : assignment) {
    j["assignment"][id] = split_name(sid);
  }
  j["leakage"] = leakage.to_json();
  return j;
}

SplitManifest SplitManifest::from_json(const nlohmann::ordered_json& j) {
  SplitManifest m;
  for (const auto& v : j.at("train_actions")) {
    m.train_actions.push_back(v.get<int>());
  }
  for (const auto& v : j.at("oov_val_actions")) {
    m.oov_val_actions.push_back(v.get<int>());
  }
  for (const auto& v : j.at("oov_test_actions")) {
    m.oov_test_actions.push_back(v.get<int>());
  }
  for (const auto& [id, name] : j.at("assignment").items()) {
    m.assignment[id] = split_from_name(name.get<std::string>());
  }
  if (j.contains("leakage")) {
    const auto& lj = j["leakage"];
    for (const auto& [k, v] : lj.at("train_counts_per_type").items()) {
      m.leakage.train_counts_per_type[k] = v.get<int>();
    }
    m.leakage.min_train_count = lj.at("min_train_count").get<int>();
    m.leakage.min_per_type_ok = lj.at("min_per_type_ok").get<bool>();
    m.leakage.oov_actions_absent_from_seen =
        lj.at("oov_actions_absent_from_seen").get<bool>();
  }
  return m;
}

SplitManifest SplitManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split manifest: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed split manifest " + path + ": " + e.what());
  }
  return from_json(j);
}

void SplitManifest::save(const std::string& path,
                         const nlohmann::ordered_json& provenance) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write split manifest: " + path);
  nlohmann::ordered_json j = to_json();
  nlohmann::ordered_json wrapped;
  wrapped["provenance"] = provenance;
  for (auto& [k, v] : j.items()) wrapped[k] = v;
  out << wrapped.dump(2) << "\n";
}

SplitManifest make_splits(const std::vector<Note>& notes,
                          const Ontology& ontology, const SplitConfig& config,
                          std::uint64_t seed) {
  SplitManifest m;
  Xoshiro256ss rng(seed);

  // Fisher-Yates over the 28 action ids: first 18 train, next 4 oov-val,
  // last 6 oov-test.
  std::vector<int> ids(kNumActionLabels);
  for (int i = 0; i < kNumActionLabels; ++i) ids[i] = i;
  rng.shuffle(ids);
  m.train_actions.assign(ids.begin(), ids.begin() + 18);
  m.oov_val_actions.assign(ids.begin() + 18, ids.begin() + 22);
  m.oov_test_actions.assign(ids.begin() + 22, ids.end());
  std::set<int> train_set(m.train_actions.begin(), m.train_actions.end());
  std::set<int> oov_val_set(m.oov_val_actions.begin(),
                            m.oov_val_actions.end());
  std::set<int> oov_test_set(m.oov_test_actions.begin(),
                             m.oov_test_actions.end());

  // A note joins a split iff ALL of its action labels are allowed there;
  // straddlers are discarded.
  std::vector<const Note*> train_pool;
  std::vector<const Note*> zero_action;
  for (const Note& note : notes) {
    std::set<int> actions = note_action_ids(note, ontology);
    if (actions.empty()) {
      zero_action.push_back(&note);
    } else if (subset_of(actions, train_set)) {
      train_pool.push_back(&note);
    } else if (subset_of(actions, oov_val_set)) {
      m.assignment[note.id] = SplitId::kOovVal;
    } else if (subset_of(actions, oov_test_set)) {
      m.assignment[note.id] = SplitId::kOovTest;
    } else {
      m.assignment[note.id] = SplitId::kDiscarded;
    }
  }

  // Zero-action notes are eligible everywhere; distribute them round-robin
  // (train, seen_val, oov_val, seen_test, oov_test), capping the seen
  // eval splits at a proportional share of their targets.
  double zero_frac =
      notes.empty() ? 0.0
                    : static_cast<double>(zero_action.size()) / notes.size();
  int seen_val_cap =
      static_cast<int>(config.seen_val_target * zero_frac + 0.5);
  int seen_test_cap =
      static_cast<int>(config.seen_test_target * zero_frac + 0.5);
  {
    std::vector<const Note*> order = zero_action;
    rng.shuffle(order);
    int seen_val_n = 0, seen_test_n = 0;
    const SplitId cycle[] = {SplitId::kTrain, SplitId::kSeenVal,
                             SplitId::kOovVal, SplitId::kSeenTest,
                             SplitId::kOovTest};
    std::size_t c = 0;
    for (const Note* note : order) {
      SplitId target = SplitId::kTrain;
      for (int tries = 0; tries < 5; ++tries) {
        SplitId cand = cycle[c % 5];
        ++c;
        if (cand == SplitId::kSeenVal && seen_val_n >= seen_val_cap) continue;
        if (cand == SplitId::kSeenTest && seen_test_n >= seen_test_cap) {
          continue;
        }
        target = cand;
        break;
      }
      if (target == SplitId::kSeenVal) ++seen_val_n;
      if (target == SplitId::kSeenTest) ++seen_test_n;
      m.assignment[note->id] = target;
    }
    // Carve the remaining seen_val / seen_test quota out of the shuffled
    // train-eligible pool; the rest is training data. A note is skipped
    // when taking it would drop one of its action types below the
    // min-per-type floor in train.
    rng.shuffle(train_pool);
    int need_val = config.seen_val_target - seen_val_n;
    int need_test = config.seen_test_target - seen_test_n;
    if (need_val < 0) need_val = 0;
    if (need_test < 0) need_test = 0;
    if (static_cast<int>(train_pool.size()) < need_val + need_test + 1) {
      throw InsufficientNotesError(
          "train-eligible pool too small for seen_val/seen_test targets");
    }
    std::map<int, int> remaining;
    std::vector<std::set<int>> pool_actions(train_pool.size());
    for (std::size_t i = 0; i < train_pool.size(); ++i) {
      pool_actions[i] = note_action_ids(*train_pool[i], ontology);
      for (int a : pool_actions[i]) remaining[a]++;
    }
    for (std::size_t i = 0; i < train_pool.size(); ++i) {
      SplitId target = SplitId::kTrain;
      if (need_val > 0 || need_test > 0) {
        bool safe = true;
        for (int a : pool_actions[i]) {
          if (remaining[a] - 1 < config.min_per_type) {
            safe = false;
            break;
          }
        }
        if (safe) {
          if (need_val > 0) {
            target = SplitId::kSeenVal;
            --need_val;
          } else {
            target = SplitId::kSeenTest;
            --need_test;
          }
          for (int a : pool_actions[i]) remaining[a]--;
        }
      }
      m.assignment[train_pool[i]->id] = target;
    }
    if (need_val > 0 || need_test > 0) {
      throw InsufficientNotesError(
          "cannot meet seen_val/seen_test targets without breaking the "
          "min-per-type floor");
    }
  }

  // Leakage report.
  std::map<int, int> per_type;
  for (int id : m.train_actions) per_type[id] = 0;
  bool oov_leak = false;
  for (const Note& note : notes) {
    SplitId sid = m.assignment.at(note.id);
    std::set<int> actions = note_action_ids(note, ontology);
    if (sid == SplitId::kTrain) {
      for (int a : actions) per_type[a]++;
    }
    if (sid == SplitId::kTrain || sid == SplitId::kSeenVal ||
        sid == SplitId::kSeenTest) {
      for (int a : actions) {
        if (oov_val_set.count(a) || oov_test_set.count(a)) oov_leak = true;
      }
    }
  }
  m.leakage.min_train_count = notes.empty() ? 0 : 1 << 30;
  for (const auto& [id, count] : per_type) {
    m.leakage.train_counts_per_type[ontology.label(id).name] = count;
    m.leakage.min_train_count = std::min(m.leakage.min_train_count, count);
  }
  m.leakage.min_per_type_ok =
      m.leakage.min_train_count >= config.min_per_type;
  m.leakage.oov_actions_absent_from_seen = !oov_leak;
  return m;
}

void SplitManifest::check(const std::vector<Note>& notes,
                          const Ontology& ontology) const {
  // (1) the action sets partition the 28 labels 18+4+6
  std::set<int> all;
  all.insert(train_actions.begin(), train_actions.end());
  all.insert(oov_val_actions.begin(), oov_val_actions.end());
  all.insert(oov_test_actions.begin(), oov_test_actions.end());
  if (train_actions.size() != 18 || oov_val_actions.size() != 4 ||
      oov_test_actions.size() != 6 ||
      static_cast<int>(all.size()) != kNumActionLabels) {
    throw ValidationError("action sets do not partition the 28 labels");
  }
  std::set<int> train_set(train_actions.begin(), train_actions.end());
  std::set<int> oov_val_set(oov_val_actions.begin(), oov_val_actions.end());
  std::set<int> oov_test_set(oov_test_actions.begin(), oov_test_actions.end());

  for (const Note& note : notes) {
    auto it = assignment.find(note.id);
    if (it == assignment.end()) {
      throw ValidationError("note " + note.id + " has no split assignment");
    }
    SplitId sid = it->second;
    std::set<int> actions = note_action_ids(note, ontology);
    // (2) every note's actions lie inside its split's allowed set
    const std::set<int>* allowed = nullptr;
    switch (sid) {
      case SplitId::kTrain:
      case SplitId::kSeenVal:
      case SplitId::kSeenTest:
        allowed = &train_set;
        break;
      case SplitId::kOovVal:
        allowed = &oov_val_set;
        break;
      case SplitId::kOovTest:
        allowed = &oov_test_set;
        break;
      case SplitId::kDiscarded:
        continue;
    }
    if (!subset_of(actions, *allowed)) {
      throw ValidationError("note " + note.id +
                            " carries actions outside its split's set");
    }
    // (4) no oov-test action in any training note is implied by (2)
  }
  // (3) train/seen_val/seen_test disjoint by note id holds by construction
  // of the map (one assignment per id); verify ids are unique in notes.
  std::set<std::string> ids;
  for (const Note& note : notes) {
    if (!ids.insert(note.id).second) {
      throw ValidationError("duplicate note id: " + note.id);
    }
  }
}

}  // namespace followup
