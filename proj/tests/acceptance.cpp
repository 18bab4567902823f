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

// End-to-end release gate. Each numbered check prints exactly one PASS or
// FAIL line; the process exits nonzero when any check fails. The checks
// run against the default data files and the default experiment seeds
// (corpus 7, splits 13, training 42), so a green run certifies the shipped
// configuration, not a tuned one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "followup/errors.hpp"
#include "followup/eval.hpp"
#include "followup/generator.hpp"
#include "followup/model.hpp"
#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "followup/pipeline.hpp"
#include "followup/rng.hpp"
#include "followup/splits.hpp"
#include "followup/temporal.hpp"
#include "followup/train.hpp"

using namespace followup;

namespace {

constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::uint64_t kSplitSeed = 13;

int g_failures = 0;

void report(int id, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] %02d %s%s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int id, const std::string& what,
         const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [pass, detail] = body();
    report(id, what, pass, detail);
  } catch (const std::exception& e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

struct Fixture {
  Ontology ontology = Ontology::load(default_ontology_path());
  TemplateSet templates = TemplateSet::load(default_templates_path());
  std::vector<Note> corpus;
  SplitManifest splits;
  std::unique_ptr<Model> model;
  std::vector<NotePrediction> seen_preds, oov_preds;
  Metrics seen_metrics, oov_metrics;
  double train_minutes = 0.0;
  bool trained = false;
};

std::vector<Note> notes_for(const Fixture& fx, SplitId split) {
  std::vector<Note> out;
  for (const std::string& id : fx.splits.notes_in(split)) {
    for (const Note& n : fx.corpus) {
      if (n.id == id) {
        out.push_back(n);
        break;
      }
    }
  }
  return out;
}

Note probe_note(std::string id, std::string text,
                const std::vector<std::tuple<EntityKind, std::string>>& spans,
                const std::vector<std::pair<int, int>>& links) {
  Note n;
  n.id = std::move(id);
  n.text = std::move(text);
  n.visit_date = parse_iso_date("2026-01-10");
  std::size_t cursor = 0;
  int eid = 0;
  for (const auto& [kind, surface] : spans) {
    std::size_t pos = n.text.find(surface, cursor);
    EntitySpan s;
    s.entity_id = eid++;
    s.kind = kind;
    s.start = static_cast<int>(pos);
    s.end = static_cast<int>(pos + surface.size());
    s.surface = surface;
    n.entities.push_back(s);
    cursor = pos + surface.size();
  }
  for (const auto& [ti, mi] : links) {
    ScheduledForLink l;
    l.test_entity_id = n.entities.at(ti).entity_id;
    if (mi >= 0) l.time_entity_id = n.entities.at(mi).entity_id;
    n.links.push_back(l);
  }
  return n;
}

// ---- 01: temporal oracle vectors + full corpus surface coverage ----

std::pair<bool, std::string> check_temporal(const Fixture& fx) {
  struct V {
    const char* phrase;
    int offset;
  };
  const std::vector<V> vectors = {{"tomorrow", 1},
                                  {"in 2 weeks", 14},
                                  {"ten mos", 300},
                                  {"9-week follow-up", 63},
                                  {"in approximately two months", 60}};
  for (const V& v : vectors) {
    auto t = try_normalize(v.phrase);
    if (!t || t->offset_days != v.offset) {
      return {false, std::string("vector failed: ") + v.phrase};
    }
  }
  int surfaces = 0;
  for (const Note& n : fx.corpus) {
    for (const ScheduledForLink& l : n.links) {
      if (!l.time_entity_id) continue;
      const EntitySpan* time = n.entity(*l.time_entity_id);
      if (time == nullptr) return {false, "dangling time link in " + n.id};
      if (!try_normalize(time->surface)) {
        return {false, "unnormalizable surface \"" + time->surface +
                           "\" in " + n.id};
      }
      ++surfaces;
    }
  }
  std::ostringstream d;
  d << "5 anchored vectors plus " << surfaces
    << " corpus time surfaces, all normalized with traces";
  return {surfaces > 0, d.str()};
}

// ---- 02: gold pair replay over the default corpus ----

std::pair<bool, std::string> check_audit(const Fixture& fx) {
  AuditReport r = audit_corpus(fx.corpus, fx.ontology);
  std::ostringstream d;
  d << r.n_pairs << " pairs across " << r.n_notes << " notes, "
    << r.n_mismatched_notes << " mismatched";
  return {r.n_notes == static_cast<int>(fx.corpus.size()) &&
              r.n_mismatched_notes == 0,
          d.str()};
}

// ---- 03: trained model quality on seen and oov test splits ----

std::pair<bool, std::string> check_training(Fixture& fx) {
  std::vector<const Note*> train_notes, val_notes;
  for (const Note& n : fx.corpus) {
    switch (fx.splits.split_of(n.id)) {
      case SplitId::kTrain:
        train_notes.push_back(&n);
        break;
      case SplitId::kSeenVal:
      case SplitId::kOovVal:
        val_notes.push_back(&n);
        break;
      default:
        break;
    }
  }
  ModelConfig mc;
  mc.gazetteer = gazetteer_from(fx.ontology);
  TrainConfig tc;  // stock defaults, seed 42

  auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train_model(mc, tc, train_notes, val_notes);
  fx.train_minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count() /
      60.0;
  fx.model = std::move(result.model);
  fx.trained = true;

  auto evaluate = [&](SplitId split, std::vector<NotePrediction>* store) {
    std::vector<Note> notes = notes_for(fx, split);
    *store = extract_batch(*fx.model, fx.ontology, notes);
    return aggregate(score_corpus(notes, *store));
  };
  fx.seen_metrics = evaluate(SplitId::kSeenTest, &fx.seen_preds);
  fx.oov_metrics = evaluate(SplitId::kOovTest, &fx.oov_preds);

  double seen_mae = fx.seen_metrics.mae.value_or(0.0);
  double oov_mae = fx.oov_metrics.mae.value_or(0.0);
  bool pass = fx.seen_metrics.f1 >= 0.90 && fx.oov_metrics.f1 >= 0.80 &&
              seen_mae == 0.0 && oov_mae == 0.0 && fx.train_minutes < 30.0;
  std::ostringstream d;
  d.precision(4);
  d << "seen F1 " << fx.seen_metrics.f1 << " (need >= 0.90), oov F1 "
    << fx.oov_metrics.f1 << " (need >= 0.80), MAE " << seen_mae << "/"
    << oov_mae << " (need 0), trained in " << fx.train_minutes
    << " min (budget 30)";
  return {pass, d.str()};
}

// ---- 04: finite-difference gradient verification ----

std::pair<bool, std::string> check_gradients() {
  using EK = EntityKind;
  ModelConfig mc;
  mc.encoder.hidden_dim = 16;
  mc.encoder.word_buckets = 512;
  mc.encoder.ngram_buckets = 256;
  mc.encoder.max_window_tokens = 64;
  mc.encoder.window_stride = 16;
  mc.width_emb_dim = 8;
  mc.dist_emb_dim = 8;
  mc.gazetteer = {"mri brain", "echocardiogram", "emg", "colonoscopy"};

  std::vector<std::vector<Note>> batches;
  batches.push_back({probe_note(
      "a0", "Plan: MRI Brain in 2 weeks. Order Echocardiogram today.",
      {{EK::kTest, "MRI Brain"},
       {EK::kTime, "in 2 weeks"},
       {EK::kTest, "Echocardiogram"},
       {EK::kTime, "today"}},
      {{0, 1}, {2, 3}})});
  batches.push_back(
      {probe_note("a1", "Follow up EMG x2w if tolerated.",
                  {{EK::kTest, "EMG"}, {EK::kTime, "x2w"}}, {{0, 1}}),
       probe_note("a2", "Schedule Colonoscopy at next visit.",
                  {{EK::kTest, "Colonoscopy"}}, {{0, -1}})});
  batches.push_back({probe_note(
      "a3", "RTC 3mo. Repeat EMG nine weeks from now, 9-week follow-up.",
      {{EK::kTime, "RTC 3mo"}, {EK::kTest, "EMG"}, {EK::kTime, "9-week follow-up"}},
      {{1, 2}})});

  TrainConfig tc;
  tc.word_dropout = 0.0;
  Model model(mc, 5);
  const double eps = 1e-5;
  int checked = 0;
  double worst = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    std::vector<const Note*> batch;
    for (const Note& n : batches[b]) batch.push_back(&n);
    std::vector<double> grad;
    Model probe(mc, model.params());
    probe.loss_and_grad(batch, tc, &grad, 0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (std::abs(grad[i]) > 1e-10) active.push_back(i);
    }
    Xoshiro256ss rng(100 + b);
    rng.shuffle(active);
    if (active.size() > 70) active.resize(70);
    for (std::size_t idx : active) {
      double saved = probe.params().flat()[idx];
      probe.params().flat()[idx] = saved + eps;
      double up = probe.loss_and_grad(batch, tc, nullptr, 0);
      probe.params().flat()[idx] = saved - eps;
      double down = probe.loss_and_grad(batch, tc, nullptr, 0);
      probe.params().flat()[idx] = saved;
      double fd = (up - down) / (2.0 * eps);
      double rel = std::abs(grad[idx] - fd) /
                   std::max(1e-6, std::abs(grad[idx]) + std::abs(fd));
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  std::ostringstream d;
  d << checked << " sampled parameters over 3 batches, worst relative error "
    << worst << " (tolerance 1e-4)";
  return {checked >= 200 && worst <= 1e-4, d.str()};
}

// ---- 05: metric implementation vs an independent oracle ----

Metrics oracle_metrics(
    const std::vector<std::pair<std::set<CanonicalPair>,
                                std::set<CanonicalPair>>>& instances) {
  long n_pred = 0, n_gold = 0, n_correct = 0, n_label_matched = 0;
  double abs_err_sum = 0.0;
  for (const auto& [pred, gold] : instances) {
    n_pred += static_cast<long>(pred.size());
    n_gold += static_cast<long>(gold.size());
    for (const CanonicalPair& p : pred) {
      if (gold.count(p)) ++n_correct;
      long best = -1;
      for (const CanonicalPair& g : gold) {
        if (g.action != p.action) continue;
        long err = std::labs(static_cast<long>(g.days_offset) -
                             static_cast<long>(p.days_offset));
        if (best < 0 || err < best) best = err;
      }
      if (best >= 0) {
        ++n_label_matched;
        abs_err_sum += static_cast<double>(best);
      }
    }
  }
  Metrics m;
  if (n_pred == 0 && n_gold == 0) {
    m.precision = m.recall = m.f1 = 1.0;
    return m;
  }
  m.precision = n_pred == 0 ? 0.0 : static_cast<double>(n_correct) / n_pred;
  m.recall = n_gold == 0 ? 0.0 : static_cast<double>(n_correct) / n_gold;
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  if (n_label_matched > 0) m.mae = abs_err_sum / n_label_matched;
  return m;
}

std::pair<bool, std::string> check_metric_oracle() {
  const std::vector<std::string> actions{"A", "B", "C", "D"};
  const std::vector<int> offsets{0, 1, 7, 14, 30, 90};
  Xoshiro256ss rng(2026);
  auto random_pairs = [&] {
    std::set<CanonicalPair> out;
    std::uint64_t n = rng.below(4);
    for (std::uint64_t i = 0; i < n; ++i) {
      out.insert({actions[rng.below(actions.size())],
                  offsets[rng.below(offsets.size())]});
    }
    return out;
  };
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n_notes = 1 + static_cast<int>(rng.below(6));
    std::vector<std::pair<std::set<CanonicalPair>, std::set<CanonicalPair>>>
        instances;
    std::vector<NoteOutcome> outcomes;
    for (int i = 0; i < n_notes; ++i) {
      auto pred = random_pairs();
      auto gold = random_pairs();
      outcomes.push_back(score_note("n" + std::to_string(i), pred, gold));
      instances.emplace_back(std::move(pred), std::move(gold));
    }
    Metrics lib = aggregate(outcomes);
    Metrics want = oracle_metrics(instances);
    if (!(lib.precision == want.precision && lib.recall == want.recall &&
          lib.f1 == want.f1 && lib.mae == want.mae)) {
      ++mismatches;
    }
  }
  std::ostringstream d;
  d << "1000 random evaluation instances, " << mismatches
    << " bit-level disagreements";
  return {mismatches == 0, d.str()};
}

// ---- 06: bootstrap determinism and interval coverage ----

std::pair<bool, std::string> check_bootstrap() {
  std::vector<NoteOutcome> outcomes;
  for (int i = 0; i < 100; ++i) {
    NoteOutcome o;
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%03d", i);
    o.note_id = buf;
    o.n_pred = 2;
    o.n_gold = 2;
    o.n_correct = (i % 2 == 0) ? 2 : 0;
    o.n_label_matched = 2;
    o.abs_err_sum = (i % 2 == 0) ? 0.0 : 14.0;
    outcomes.push_back(o);
  }
  BootstrapReport a = bootstrap(outcomes, 1000, 123);
  BootstrapReport b = bootstrap(outcomes, 1000, 123);
  bool deterministic = a.to_json() == b.to_json();
  bool brackets = a.point.f1 == 0.5 && a.f1_ci.lo <= 0.5 &&
                  a.f1_ci.hi >= 0.5 && a.f1_ci.lo < a.f1_ci.hi;
  std::ostringstream d;
  d.precision(4);
  d << "point F1 " << a.point.f1 << ", 95% CI [" << a.f1_ci.lo << ", "
    << a.f1_ci.hi << "], identical across reruns: "
    << (deterministic ? "yes" : "no");
  return {deterministic && brackets, d.str()};
}

// ---- 07: split invariants across 50 seeds ----

std::pair<bool, std::string> check_splits(const Fixture& fx) {
  SplitConfig cfg;  // stock targets
  int worst_floor = 1 << 30;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SplitManifest m = make_splits(fx.corpus, fx.ontology, cfg, seed);
    m.check(fx.corpus, fx.ontology);
    if (!m.leakage.min_per_type_ok || !m.leakage.oov_actions_absent_from_seen) {
      return {false, "leakage flags failed at seed " + std::to_string(seed)};
    }
    if (m.train_actions.size() != 18 || m.oov_val_actions.size() != 4 ||
        m.oov_test_actions.size() != 6) {
      return {false, "action partition wrong at seed " + std::to_string(seed)};
    }
    if (static_cast<int>(m.notes_in(SplitId::kSeenVal).size()) !=
            cfg.seen_val_target ||
        static_cast<int>(m.notes_in(SplitId::kSeenTest).size()) !=
            cfg.seen_test_target) {
      return {false, "seen quotas missed at seed " + std::to_string(seed)};
    }
    worst_floor = std::min(worst_floor, m.leakage.min_train_count);
  }
  std::ostringstream d;
  d << "50 seeds, all invariants hold, minimum per-type training support "
    << worst_floor << " (floor " << cfg.min_per_type << ")";
  return {worst_floor >= cfg.min_per_type, d.str()};
}

// ---- 08: corpus composition ----

std::pair<bool, std::string> check_composition(const Fixture& fx) {
  GeneratorConfig cfg = GeneratorConfig::defaults();
  StatsReport st = corpus_stats(fx.corpus, fx.templates);
  std::ostringstream d;
  auto fail = [&](const std::string& why) {
    return std::make_pair(false, why);
  };
  if (st.n_notes != cfg.n_notes) return fail("wrong corpus size");
  for (int k = 0; k < 3; ++k) {
    double frac = st.item_count_histogram[k] / static_cast<double>(st.n_notes);
    if (std::abs(frac - cfg.item_count_probs[k]) > 0.03) {
      d << "item-count fraction " << k << " off target: " << frac;
      return fail(d.str());
    }
  }
  if (st.length_min < cfg.min_chars || st.length_max > cfg.max_chars) {
    return fail("length band violated");
  }
  for (const auto& [spec, count] : st.notes_per_specialty) {
    if (count < 350 || count > 450) {
      return fail("specialty imbalance: " + spec + " has " +
                  std::to_string(count));
    }
  }
  if (static_cast<int>(st.notes_per_specialty.size()) != kNumSpecialties) {
    return fail("missing specialty");
  }
  for (const std::string& h : fx.templates.plan_headers) {
    if (st.plan_header_counts.count(h) == 0 || st.plan_header_counts.at(h) == 0) {
      return fail("unused plan header: " + h);
    }
  }
  if (st.distinct_time_surfaces < 300) {
    return fail("temporal surface variety too low");
  }
  d << st.n_notes << " notes, item histogram ["
    << st.item_count_histogram[0] << ", " << st.item_count_histogram[1]
    << ", " << st.item_count_histogram[2] << "], lengths " << st.length_min
    << ".." << st.length_max << ", " << st.distinct_time_surfaces
    << " distinct time surfaces, all plan headers in use";
  return {true, d.str()};
}

// ---- 09: baseline ingestion with calendar-date items ----

std::pair<bool, std::string> check_baseline(const Fixture& fx) {
  using EK = EntityKind;
  std::vector<Note> notes;
  Note b0 = probe_note("b0", "Plan: MRI Brain in 2 weeks.",
                       {{EK::kTest, "MRI Brain"}, {EK::kTime, "in 2 weeks"}},
                       {{0, 1}});
  b0.pairs = replay_gold_pairs(b0, fx.ontology);
  Note b1 = probe_note("b1", "Plan: EMG in 30 days.",
                       {{EK::kTest, "EMG"}, {EK::kTime, "in 30 days"}},
                       {{0, 1}});
  b1.pairs = replay_gold_pairs(b1, fx.ontology);
  notes.push_back(b0);
  notes.push_back(b1);

  auto path = std::filesystem::temp_directory_path() /
              "followup_acceptance_baseline.jsonl";
  {
    std::ofstream out(path);
    // Both visits are 2026-01-10; 2026-01-24 is exactly 14 days later and
    // 2026-01-03 is 7 days earlier, so the expected offsets are +14 and -7.
    out << R"({"note_id": "b0", "items": [)"
        << R"({"action": "mri brain", "period_date": "2026-01-24"},)"
        << R"({"action": "quantum flux scan", "period_date": "2026-02-01"}]})"
        << "\n";
    out << R"({"note_id": "b1", "items": [)"
        << R"({"action": "EMG", "period_date": "2026-01-03"}]})"
        << "\n";
  }
  BaselineIngest ing = ingest_baseline(path.string(), notes, fx.ontology);
  bool negative_kept = ing.preds.size() == 2 &&
                       ing.preds[1].pairs.count({"EMG", -7}) == 1;
  Metrics m = aggregate(score_corpus(notes, ing.preds));
  // Analytically: 2 surviving predictions, 1 exact match, 2 gold pairs,
  // so precision = recall = F1 = 1/2 and the unknown action is dropped.
  bool pass = ing.n_items == 3 && ing.n_no_match == 1 && negative_kept &&
              m.precision == 0.5 && m.recall == 0.5 && m.f1 == 0.5;
  std::ostringstream d;
  d << "offset +14 resolved, offset -7 preserved, 1 unknown action dropped, "
       "pair F1 "
    << m.f1 << " (expected 0.5)";
  return {pass, d.str()};
}

// ---- 10: prediction traces replay to the same offsets ----

std::pair<bool, std::string> check_trace_replay(const Fixture& fx) {
  if (!fx.trained) return {false, "skipped: training check did not complete"};
  int traces = 0, mismatches = 0;
  auto scan = [&](const std::vector<NotePrediction>& preds) {
    for (const NotePrediction& p : preds) {
      for (const PredictionItem& item : p.items) {
        if (!item.norm) continue;
        ++traces;
        auto again = try_normalize(item.norm->input);
        if (!again || again->offset_days != item.norm->offset_days ||
            again->matched_rule != item.norm->matched_rule) {
          ++mismatches;
        }
      }
    }
  };
  scan(fx.seen_preds);
  scan(fx.oov_preds);
  std::ostringstream d;
  d << traces << " recorded normalization traces replayed, " << mismatches
    << " mismatches";
  return {traces > 100 && mismatches == 0, d.str()};
}

}  // namespace

int main() {
  Fixture fx;
  {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    fx.corpus = generate_corpus(cfg, fx.ontology, fx.templates, kCorpusSeed);
    fx.splits = make_splits(fx.corpus, fx.ontology, SplitConfig{}, kSplitSeed);
  }

  run(1, "temporal normalization vectors and corpus coverage",
      [&] { return check_temporal(fx); });
  run(2, "gold pair replay audit", [&] { return check_audit(fx); });
  run(3, "trained extraction quality on seen and oov test splits",
      [&] { return check_training(fx); });
  run(4, "analytic gradients vs finite differences",
      [] { return check_gradients(); });
  run(5, "metric implementation vs independent oracle",
      [] { return check_metric_oracle(); });
  run(6, "bootstrap determinism and interval coverage",
      [] { return check_bootstrap(); });
  run(7, "split invariants across 50 seeds", [&] { return check_splits(fx); });
  run(8, "corpus composition", [&] { return check_composition(fx); });
  run(9, "calendar-date baseline ingestion",
      [&] { return check_baseline(fx); });
  run(10, "prediction trace replay", [&] { return check_trace_replay(fx); });

  if (g_failures > 0) {
    std::printf("%d of 10 checks failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 checks passed\n");
  return 0;
}
