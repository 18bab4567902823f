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

#include "followup/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "followup/errors.hpp"

namespace followup {

namespace {

using Json = nlohmann::ordered_json;

Json span_to_json(const EntitySpan& e) {
  return Json{{"entity_id", e.entity_id},
              {"kind", e.kind == EntityKind::kTest ? "TEST" : "TIME"},
              {"start", e.start},
              {"end", e.end},
              {"surface", e.surface}};
}

EntitySpan span_from_json(const Json& j) {
  EntitySpan e;
  e.entity_id = j.at("entity_id").get<int>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "TEST") {
    e.kind = EntityKind::kTest;
  } else if (kind == "TIME") {
    e.kind = EntityKind::kTime;
  } else {
    throw ParseError("unknown entity kind " + kind);
  }
  e.start = j.at("start").get<int>();
  e.end = j.at("end").get<int>();
  e.surface = j.at("surface").get<std::string>();
  return e;
}

}  // namespace

std::string_view drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::kLinkNone: return "link_none";
    case DropReason::kCanonNoMatch: return "canon_no_match";
    case DropReason::kNormFail: return "norm_fail";
  }
  throw ValidationError("bad drop reason");
}

DropReason drop_reason_from_name(std::string_view name) {
  if (name == "link_none") return DropReason::kLinkNone;
  if (name == "canon_no_match") return DropReason::kCanonNoMatch;
  if (name == "norm_fail") return DropReason::kNormFail;
  throw ParseError("unknown drop reason " + std::string(name));
}

Json PredictionItem::to_json() const {
  Json j;
  j["test"] = span_to_json(test);
  j["time"] = time ? span_to_json(*time) : Json(nullptr);
  j["link_prob"] = link_prob;
  j["action"] = action ? Json(*action) : Json(nullptr);
  j["norm"] = norm ? norm->to_json() : Json(nullptr);
  j["drop"] = drop ? Json(std::string(drop_reason_name(*drop))) : Json(nullptr);
  return j;
}

PredictionItem PredictionItem::from_json(const Json& j) {
  PredictionItem item;
  item.test = span_from_json(j.at("test"));
  if (!j.at("time").is_null()) item.time = span_from_json(j.at("time"));
  item.link_prob = j.at("link_prob").get<double>();
  if (!j.at("action").is_null()) {
    item.action = j.at("action").get<std::string>();
  }
  if (!j.at("norm").is_null()) {
    item.norm = NormalizationTrace::from_json(j.at("norm"));
  }
  if (!j.at("drop").is_null()) {
    item.drop = drop_reason_from_name(j.at("drop").get<std::string>());
  }
  return item;
}

Json NotePrediction::to_json() const {
  Json j;
  j["note_id"] = note_id;
  j["entities"] = Json::array();
  for (const auto& e : entities) j["entities"].push_back(span_to_json(e));
  j["items"] = Json::array();
  for (const auto& it : items) j["items"].push_back(it.to_json());
  j["pairs"] = Json::array();
  for (const auto& p : pairs) {
    j["pairs"].push_back(Json::array({p.action, p.days_offset}));
  }
  return j;
}

NotePrediction NotePrediction::from_json(const Json& j) {
  NotePrediction pred;
  pred.note_id = j.at("note_id").get<std::string>();
  for (const auto& ej : j.at("entities")) {
    pred.entities.push_back(span_from_json(ej));
  }
  for (const auto& ij : j.at("items")) {
    pred.items.push_back(PredictionItem::from_json(ij));
  }
  for (const auto& pj : j.at("pairs")) {
    pred.pairs.insert({pj.at(0).get<std::string>(), pj.at(1).get<int>()});
  }
  return pred;
}

NotePrediction extract(const Model& model, const Ontology& ontology,
                       const Note& note) {
  NotePrediction pred;
  pred.note_id = note.id;

  Model::Encoded enc = model.encode(note.text);
  std::vector<EntitySpan> raw;
  for (std::size_t w = 0; w < enc.windows.size(); ++w) {
    const Window& win = enc.windows[w];
    auto probs = model.tag_probs(enc, static_cast<int>(w));
    const int T = win.token_end - win.token_begin;
    std::vector<BioLabel> tags(T, BioLabel::kO);
    std::vector<Token> wtokens(enc.tokens.begin() + win.token_begin,
                               enc.tokens.begin() + win.token_end);
    for (int t = 0; t < T; ++t) {
      int best = 0;
      for (int c = 1; c < kNumBioLabels; ++c) {
        if (probs[t][c] > probs[t][best]) best = c;
      }
      tags[t] = static_cast<BioLabel>(best);
    }
    for (auto& s : decode_bio(tags, wtokens, note.text)) {
      raw.push_back(std::move(s));
    }
  }
  pred.entities = merge_spans(std::move(raw), note.text);

  auto contains = [](const Window& w, int b, int e) {
    return b >= w.token_begin && e < w.token_end;
  };
  for (const auto& span : pred.entities) {
    if (span.kind != EntityKind::kTest) continue;
    PredictionItem item;
    item.test = span;
    auto tr = token_range(enc.tokens, span.start, span.end);
    int w = -1;
    if (tr) {
      for (std::size_t i = 0; i < enc.windows.size(); ++i) {
        if (contains(enc.windows[i], tr->first, tr->second)) {
          w = static_cast<int>(i);
          break;
        }
      }
    }
    std::vector<TokenSpan> cands;
    std::vector<const EntitySpan*> cand_spans;
    if (w >= 0) {
      for (const auto& time : pred.entities) {
        if (time.kind != EntityKind::kTime) continue;
        auto er = token_range(enc.tokens, time.start, time.end);
        if (!er || !contains(enc.windows[w], er->first, er->second)) continue;
        cands.push_back({er->first, er->second, time.start});
        cand_spans.push_back(&time);
      }
    }
    if (w < 0 || cands.empty()) {
      item.link_prob = 1.0;
      item.drop = DropReason::kLinkNone;
      pred.items.push_back(std::move(item));
      continue;
    }
    std::vector<double> dist = model.link_distribution(
        enc, w, {tr->first, tr->second, span.start}, cands);
    int best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
      if (dist[i] > dist[best]) best = static_cast<int>(i);
    }
    item.link_prob = dist[best];
    if (best == static_cast<int>(cands.size())) {
      item.drop = DropReason::kLinkNone;
      pred.items.push_back(std::move(item));
      continue;
    }
    item.time = *cand_spans[best];

    const ActionLabel* label = ontology.canonicalize(span.surface);
    if (!label) {
      item.drop = DropReason::kCanonNoMatch;
      pred.items.push_back(std::move(item));
      continue;
    }
    item.action = label->name;
    auto trace = try_normalize(item.time->surface);
    if (!trace) {
      item.drop = DropReason::kNormFail;
      pred.items.push_back(std::move(item));
      continue;
    }
    item.norm = *trace;
    pred.pairs.insert({label->name, trace->offset_days});
    pred.items.push_back(std::move(item));
  }
  return pred;
}

std::vector<NotePrediction> extract_batch(const Model& model,
                                          const Ontology& ontology,
                                          const std::vector<Note>& notes) {
  std::vector<NotePrediction> out;
  out.reserve(notes.size());
  for (const auto& note : notes) {
    out.push_back(extract(model, ontology, note));
  }
  return out;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<NotePrediction>& preds,
                             const Json& provenance) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << Json{{"provenance", provenance}}.dump() << "\n";
  for (const auto& p : preds) out << p.to_json().dump() << "\n";
  if (!out) throw IoError("short write on " + path);
}

std::vector<NotePrediction> read_predictions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<NotePrediction> preds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": invalid json: " + e.what());
    }
    if (lineno == 1 && j.contains("provenance")) continue;
    try {
      preds.push_back(NotePrediction::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return preds;
}

std::set<CanonicalPair> replay_gold_pairs(const Note& note,
                                          const Ontology& ontology) {
  std::set<CanonicalPair> pairs;
  for (const auto& link : note.links) {
    if (!link.time_entity_id) continue;
    const EntitySpan* test = note.entity(link.test_entity_id);
    const EntitySpan* time = note.entity(*link.time_entity_id);
    if (!test || !time) {
      throw ValidationError("dangling link in note " + note.id);
    }
    const ActionLabel* label = ontology.canonicalize(test->surface);
    if (!label) continue;
    auto trace = try_normalize(time->surface);
    if (!trace) continue;
    pairs.insert({label->name, trace->offset_days});
  }
  return pairs;
}

Json AuditReport::to_json() const {
  return Json{{"n_notes", n_notes},
              {"n_pairs", n_pairs},
              {"n_mismatched_notes", n_mismatched_notes},
              {"mismatched_ids", mismatched_ids}};
}

AuditReport audit_corpus(const std::vector<Note>& notes,
                         const Ontology& ontology) {
  AuditReport report;
  report.n_notes = static_cast<int>(notes.size());
  for (const auto& note : notes) {
    report.n_pairs += static_cast<int>(note.pairs.size());
    if (replay_gold_pairs(note, ontology) != note.pairs) {
      ++report.n_mismatched_notes;
      report.mismatched_ids.push_back(note.id);
    }
  }
  return report;
}

}  // namespace followup
