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

#include "followup/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "followup/errors.hpp"
#include "followup/rng.hpp"
#include "followup/temporal.hpp"

namespace followup {

namespace {
using Json = nlohmann::ordered_json;
}

Json NoteOutcome::to_json() const {
  return Json{{"note_id", note_id},
              {"n_pred", n_pred},
              {"n_gold", n_gold},
              {"n_correct", n_correct},
              {"abs_err_sum", abs_err_sum},
              {"n_label_matched", n_label_matched}};
}

NoteOutcome NoteOutcome::from_json(const Json& j) {
  NoteOutcome o;
  o.note_id = j.at("note_id").get<std::string>();
  o.n_pred = j.at("n_pred").get<int>();
  o.n_gold = j.at("n_gold").get<int>();
  o.n_correct = j.at("n_correct").get<int>();
  o.abs_err_sum = j.at("abs_err_sum").get<double>();
  o.n_label_matched = j.at("n_label_matched").get<int>();
  return o;
}

NoteOutcome score_note(const std::string& note_id,
                       const std::set<CanonicalPair>& predicted,
                       const std::set<CanonicalPair>& gold) {
  NoteOutcome o;
  o.note_id = note_id;
  o.n_pred = static_cast<int>(predicted.size());
  o.n_gold = static_cast<int>(gold.size());
  for (const auto& p : predicted) {
    if (gold.count(p)) ++o.n_correct;
    int best = -1;
    for (const auto& g : gold) {
      if (g.action != p.action) continue;
      int err = std::abs(g.days_offset - p.days_offset);
      if (best < 0 || err < best) best = err;
    }
    if (best >= 0) {
      o.abs_err_sum += best;
      ++o.n_label_matched;
    }
  }
  return o;
}

std::vector<NoteOutcome> score_corpus(
    const std::vector<Note>& gold, const std::vector<NotePrediction>& preds) {
  std::map<std::string, const Note*> by_id;
  for (const auto& n : gold) by_id[n.id] = &n;
  std::map<std::string, const NotePrediction*> pred_by_id;
  for (const auto& p : preds) {
    if (!by_id.count(p.note_id)) {
      throw UnknownNoteId("prediction for unknown note " + p.note_id);
    }
    if (!pred_by_id.emplace(p.note_id, &p).second) {
      throw ValidationError("duplicate prediction for note " + p.note_id);
    }
  }
  std::vector<NoteOutcome> outcomes;
  outcomes.reserve(gold.size());
  for (const auto& [id, note] : by_id) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) {
      throw ValidationError("no prediction for note " + id);
    }
    outcomes.push_back(score_note(id, it->second->pairs, note->pairs));
  }
  return outcomes;  // map iteration leaves these sorted by note_id
}

Json Metrics::to_json() const {
  return Json{{"precision", precision},
              {"recall", recall},
              {"f1", f1},
              {"mae", mae ? Json(*mae) : Json(nullptr)}};
}

Metrics aggregate(const std::vector<NoteOutcome>& outcomes) {
  if (outcomes.empty()) throw EmptyEvaluation("no outcomes to aggregate");
  long pred = 0, gold = 0, correct = 0, matched = 0;
  double err = 0.0;
  for (const auto& o : outcomes) {
    pred += o.n_pred;
    gold += o.n_gold;
    correct += o.n_correct;
    matched += o.n_label_matched;
    err += o.abs_err_sum;
  }
  Metrics m;
  if (pred == 0 && gold == 0) {
    m.precision = m.recall = m.f1 = 1.0;
  } else {
    m.precision = pred == 0 ? 0.0 : static_cast<double>(correct) / pred;
    m.recall = gold == 0 ? 0.0 : static_cast<double>(correct) / gold;
    double pr = m.precision + m.recall;
    m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
  }
  if (matched > 0) m.mae = err / static_cast<double>(matched);
  return m;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyEvaluation("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  double h = static_cast<double>(n - 1) * q;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, n - 1);
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Json BootstrapReport::to_json() const {
  Json j;
  j["point"] = point.to_json();
  j["precision_ci"] = Json::array({precision_ci.lo, precision_ci.hi});
  j["recall_ci"] = Json::array({recall_ci.lo, recall_ci.hi});
  j["f1_ci"] = Json::array({f1_ci.lo, f1_ci.hi});
  j["mae_ci"] = mae_ci ? Json::array({mae_ci->lo, mae_ci->hi}) : Json(nullptr);
  j["n_replicas"] = n_replicas;
  j["n_mae_null_replicas"] = n_mae_null_replicas;
  j["seed"] = seed;
  return j;
}

BootstrapReport BootstrapReport::from_json(const Json& j) {
  BootstrapReport r;
  const Json& p = j.at("point");
  r.point.precision = p.at("precision").get<double>();
  r.point.recall = p.at("recall").get<double>();
  r.point.f1 = p.at("f1").get<double>();
  if (!p.at("mae").is_null()) r.point.mae = p.at("mae").get<double>();
  auto ci = [&j](const char* key) {
    return CiInterval{j.at(key).at(0).get<double>(),
                      j.at(key).at(1).get<double>()};
  };
  r.precision_ci = ci("precision_ci");
  r.recall_ci = ci("recall_ci");
  r.f1_ci = ci("f1_ci");
  if (!j.at("mae_ci").is_null()) r.mae_ci = ci("mae_ci");
  r.n_replicas = j.at("n_replicas").get<int>();
  r.n_mae_null_replicas = j.at("n_mae_null_replicas").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

BootstrapReport bootstrap(std::vector<NoteOutcome> outcomes, int n_replicas,
                          std::uint64_t seed) {
  if (n_replicas < 1) throw ConfigError("n_replicas must be >= 1");
  std::sort(outcomes.begin(), outcomes.end(),
            [](const NoteOutcome& a, const NoteOutcome& b) {
              return a.note_id < b.note_id;
            });
  BootstrapReport report;
  report.point = aggregate(outcomes);
  report.n_replicas = n_replicas;
  report.seed = seed;

  const std::size_t n = outcomes.size();
  std::vector<double> ps, rs, fs, maes;
  ps.reserve(n_replicas);
  rs.reserve(n_replicas);
  fs.reserve(n_replicas);
  std::vector<NoteOutcome> sample(n);
  for (int r = 0; r < n_replicas; ++r) {
    Xoshiro256ss rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = outcomes[rng.below(n)];
    }
    Metrics m = aggregate(sample);
    ps.push_back(m.precision);
    rs.push_back(m.recall);
    fs.push_back(m.f1);
    if (m.mae) {
      maes.push_back(*m.mae);
    } else {
      ++report.n_mae_null_replicas;
    }
  }
  report.precision_ci = {percentile(ps, 0.025), percentile(ps, 0.975)};
  report.recall_ci = {percentile(rs, 0.025), percentile(rs, 0.975)};
  report.f1_ci = {percentile(fs, 0.025), percentile(fs, 0.975)};
  if (!maes.empty()) {
    report.mae_ci = CiInterval{percentile(maes, 0.025),
                               percentile(maes, 0.975)};
  }
  return report;
}

Json ComparisonReport::to_json() const {
  return Json{{"verdict", verdict},
              {"delta_f1", delta_f1},
              {"a_f1_ci", Json::array({a_f1_ci.lo, a_f1_ci.hi})},
              {"b_f1_ci", Json::array({b_f1_ci.lo, b_f1_ci.hi})}};
}

ComparisonReport compare_systems(const std::vector<NoteOutcome>& a,
                                 const std::vector<NoteOutcome>& b,
                                 int n_replicas, std::uint64_t seed) {
  std::set<std::string> ids_a, ids_b;
  for (const auto& o : a) ids_a.insert(o.note_id);
  for (const auto& o : b) ids_b.insert(o.note_id);
  if (ids_a != ids_b || ids_a.size() != a.size() || ids_b.size() != b.size()) {
    throw SplitMismatch("the two systems score different note sets");
  }
  BootstrapReport ra = bootstrap(a, n_replicas, seed);
  BootstrapReport rb = bootstrap(b, n_replicas, seed);
  ComparisonReport cmp;
  cmp.delta_f1 = ra.point.f1 - rb.point.f1;
  cmp.a_f1_ci = ra.f1_ci;
  cmp.b_f1_ci = rb.f1_ci;
  if (ra.f1_ci.overlaps(rb.f1_ci)) {
    cmp.verdict = "no_significant_difference";
  } else {
    cmp.verdict = cmp.delta_f1 > 0 ? "a_better" : "b_better";
  }
  return cmp;
}

BaselineIngest ingest_baseline(const std::string& path,
                               const std::vector<Note>& notes,
                               const Ontology& ontology) {
  std::map<std::string, const Note*> by_id;
  for (const auto& n : notes) by_id[n.id] = &n;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);

  BaselineIngest result;
  std::map<std::string, NotePrediction> preds;
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
    std::string note_id;
    try {
      note_id = j.at("note_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto it = by_id.find(note_id);
    if (it == by_id.end()) {
      throw UnknownNoteId("baseline prediction for unknown note " + note_id);
    }
    NotePrediction& pred = preds[note_id];
    pred.note_id = note_id;
    for (const auto& item : j.at("items")) {
      ++result.n_items;
      std::string action = item.at("action").get<std::string>();
      Date when = parse_iso_date(item.at("period_date").get<std::string>());
      const ActionLabel* label = ontology.canonicalize(action);
      if (!label) {
        ++result.n_no_match;
        continue;
      }
      int offset = date_to_offset(it->second->visit_date, when);
      pred.pairs.insert({label->name, offset});
    }
  }
  // every gold note needs a prediction record, even an empty one
  for (const auto& [id, note] : by_id) {
    (void)note;
    if (!preds.count(id)) {
      NotePrediction empty;
      empty.note_id = id;
      preds.emplace(id, std::move(empty));
    }
  }
  result.preds.reserve(preds.size());
  for (auto& [id, p] : preds) {
    (void)id;
    result.preds.push_back(std::move(p));
  }
  return result;
}

}  // namespace followup
