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

#include "followup/generator.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "followup/errors.hpp"
#include "followup/rng.hpp"
#include "followup/temporal.hpp"

namespace followup {

namespace {

std::vector<std::string> get_strings(const nlohmann::ordered_json& j,
                                     const char* key) {
  std::vector<std::string> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

const std::vector<std::string> kWritableNumbers = {
    "", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

// Written form for n, or empty when outside the grammar's lexicon.
std::string written_number(int n) {
  if (n >= 1 && n <= 20) return kWritableNumbers[n];
  if (n == 30) return "thirty";
  if (n == 60) return "sixty";
  if (n == 90) return "ninety";
  return "";
}

struct UnitInfo {
  std::string name;  // singular
  int multiplier;
  std::vector<std::string> abbrs;
};

const std::vector<UnitInfo> kUnits = {
    {"day", 1, {}},
    {"week", 7, {"wks", "wk"}},
    {"month", 30, {"mos", "mo"}},
    {"year", 365, {"yrs", "yr"}},
};

std::string pluralize(const std::string& unit, int n) {
  return n == 1 ? unit : unit + "s";
}

// The generator's side of the surface grammar: fills one time template for
// (n, unit). Returns empty when the combination is not expressible.
std::string render_time_pattern(const std::string& pattern, int n,
                                const UnitInfo& unit, Xoshiro256ss& rng) {
  std::string s = pattern;
  if (s.find("{W}") != std::string::npos) {
    std::string w = written_number(n);
    if (w.empty()) return "";
    s = replace_all(s, "{W}", w);
  }
  if (s.find("{ABBR}") != std::string::npos) {
    if (unit.abbrs.empty()) return "";
    s = replace_all(s, "{ABBR}",
                    unit.abbrs[rng.below(unit.abbrs.size())]);
  }
  s = replace_all(s, "{N}", std::to_string(n));
  s = replace_all(s, "{UNIT}", pluralize(unit.name, n));
  s = replace_all(s, "{UNIT_S}", unit.name);
  return s;
}

struct TimePhraseChoice {
  std::string surface;
  std::string role;  // adverbial | noun | clause
};

const char* kFamilies[] = {"numeric", "written_number", "abbreviation",
                           "fuzzy", "followup_noun_phrase"};

// Renders a surface phrase for `offset` days. Falls back to the numeric
// family when the sampled family cannot express the offset.
TimePhraseChoice sample_time_phrase(int offset, const TemplateSet& tpl,
                                    Xoshiro256ss& rng) {
  if (offset == 0) {
    return {tpl.offset_zero_phrases[rng.below(tpl.offset_zero_phrases.size())],
            "adverbial"};
  }
  if (offset == 1) {
    return {tpl.offset_one_phrases[rng.below(tpl.offset_one_phrases.size())],
            "adverbial"};
  }
  // Valid (n, unit) factorizations of the offset.
  std::vector<std::pair<int, const UnitInfo*>> factorizations;
  for (const UnitInfo& u : kUnits) {
    if (u.multiplier == 1 || (offset % u.multiplier == 0)) {
      int n = offset / u.multiplier;
      if (u.multiplier == 1 && offset >= 7 && offset % 7 == 0) {
        // prefer week phrasing over "in 21 days" when both exist; still
        // keep the day form as a candidate
      }
      factorizations.emplace_back(n, &u);
    }
  }
  std::string family = kFamilies[rng.below(5)];
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto& templates = tpl.time_templates.at(family);
    // Gather all renderable (template, factorization) combos.
    std::vector<TimePhraseChoice> options;
    std::uint64_t salt = rng.next();  // one stream draw for abbr choices
    Xoshiro256ss abbr_rng(salt);
    for (const auto& tt : templates) {
      for (const auto& [n, unit] : factorizations) {
        if (!tt.units.empty() &&
            std::find(tt.units.begin(), tt.units.end(), unit->name) ==
                tt.units.end()) {
          continue;
        }
        // Abbreviated and glued forms read poorly with the day unit.
        if (unit->multiplier == 1 &&
            (tt.pattern.find("{ABBR}") != std::string::npos)) {
          continue;
        }
        std::string surface = render_time_pattern(tt.pattern, n, *unit,
                                                  abbr_rng);
        if (!surface.empty()) options.push_back({surface, tt.role});
      }
    }
    if (!options.empty()) return options[rng.below(options.size())];
    family = "numeric";  // fallback; always expressible via the day unit
  }
  throw GenerationInvariantError("no time template can express offset " +
                                 std::to_string(offset));
}

std::string capitalize_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(
      static_cast<unsigned char>(s[0])));
  return s;
}

// A span placeholder inside an assembled section.
struct PendingSpan {
  int entity_id;
  EntityKind kind;
  int start;  // relative to section start
  std::string surface;
};

// Renders one plan item sentence, recording TEST/TIME span offsets relative
// to the returned string.
std::string render_item(const std::string& item_template,
                        const std::string& test_surface,
                        const std::string& time_surface, bool time_leads,
                        int test_id, int time_id,
                        std::vector<PendingSpan>* spans) {
  std::string out;
  std::size_t pos = 0;
  const std::string t = item_template;
  while (pos < t.size()) {
    std::size_t open = t.find('{', pos);
    if (open == std::string::npos) {
      out += t.substr(pos);
      break;
    }
    out += t.substr(pos, open - pos);
    std::size_t close = t.find('}', open);
    std::string slot = t.substr(open + 1, close - open - 1);
    if (slot == "TEST") {
      spans->push_back({test_id, EntityKind::kTest,
                        static_cast<int>(out.size()), test_surface});
      out += test_surface;
    } else if (slot == "TIME") {
      std::string surface =
          time_leads ? capitalize_first(time_surface) : time_surface;
      spans->push_back({time_id, EntityKind::kTime,
                        static_cast<int>(out.size()), surface});
      out += surface;
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open templates file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed templates JSON in " + path + ": " + e.what());
  }
  TemplateSet t;
  try {
    t.patient_names = get_strings(j, "patient_names");
    t.provider_names = get_strings(j, "provider_names");
    t.header_templates = get_strings(j, "header_templates");
    for (const auto& [spec, arr] : j.at("hpi_openers").items()) {
      for (const auto& v : arr) {
        t.hpi_openers[spec].push_back(v.get<std::string>());
      }
    }
    t.hpi_extra = get_strings(j, "hpi_extra");
    t.historical_distractors = get_strings(j, "historical_distractors");
    t.exam_sentences = get_strings(j, "exam_sentences");
    t.filler_sentences = get_strings(j, "filler_sentences");
    t.plan_headers = get_strings(j, "plan_headers");
    t.item_templates_adverbial = get_strings(j, "item_templates_adverbial");
    t.item_templates_time_first = get_strings(j, "item_templates_time_first");
    t.item_templates_noun = get_strings(j, "item_templates_noun");
    t.item_templates_clause = get_strings(j, "item_templates_clause");
    t.untimed_action_templates = get_strings(j, "untimed_action_templates");
    t.zero_action_plan_sentences =
        get_strings(j, "zero_action_plan_sentences");
    for (const auto& [family, arr] : j.at("time_templates").items()) {
      for (const auto& v : arr) {
        TimeTemplate tt;
        tt.pattern = v.at("pattern").get<std::string>();
        tt.role = v.at("role").get<std::string>();
        if (v.contains("units")) {
          for (const auto& u : v["units"]) {
            tt.units.push_back(u.get<std::string>());
          }
        }
        t.time_templates[family].push_back(std::move(tt));
      }
    }
    t.offset_zero_phrases = get_strings(j, "offset_zero_phrases");
    t.offset_one_phrases = get_strings(j, "offset_one_phrases");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("templates file missing field: ") + e.what());
  }
  t.validate();
  return t;
}

void TemplateSet::validate() const {
  if (plan_headers.size() != 6) {
    throw ValidationError("templates must define exactly 6 plan headers");
  }
  for (const char* family : kFamilies) {
    if (time_templates.find(family) == time_templates.end()) {
      throw ValidationError(std::string("missing time template family: ") +
                            family);
    }
  }
  for (int s = 0; s < kNumSpecialties; ++s) {
    std::string name(specialty_name(static_cast<Specialty>(s)));
    if (hpi_openers.find(name) == hpi_openers.end()) {
      throw ValidationError("missing hpi openers for specialty " + name);
    }
  }
}

std::string default_templates_path() {
  return std::string(FOLLOWUP_DATA_DIR) + "/templates.json";
}

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig c;
  c.date_min = parse_iso_date("2024-01-21");
  c.date_max = parse_iso_date("2026-01-20");
  c.offset_pool = {
      {0, 0.5},  {1, 0.5},  {3, 0.6},  {7, 1.5},  {10, 1.0}, {14, 2.0},
      {21, 1.5}, {28, 1.0}, {30, 2.0}, {42, 1.0}, {45, 0.8}, {60, 2.0},
      {63, 1.0}, {90, 1.8}, {120, 1.2}, {180, 1.5}, {270, 0.8}, {300, 0.8},
      {365, 0.8}, {540, 0.4}, {730, 0.4}};
  return c;
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::ordered_json& j) {
  GeneratorConfig c = defaults();
  if (j.contains("n_notes")) c.n_notes = j["n_notes"].get<int>();
  if (j.contains("item_count_probs")) {
    auto arr = j["item_count_probs"];
    if (!arr.is_array() || arr.size() != 3) {
      throw ConfigError("item_count_probs must be an array of 3 numbers");
    }
    for (int i = 0; i < 3; ++i) c.item_count_probs[i] = arr[i].get<double>();
  }
  if (j.contains("extra_untimed_action_prob")) {
    c.extra_untimed_action_prob = j["extra_untimed_action_prob"].get<double>();
  }
  if (j.contains("historical_distractor_prob")) {
    c.historical_distractor_prob =
        j["historical_distractor_prob"].get<double>();
  }
  if (j.contains("date_min")) {
    c.date_min = parse_iso_date(j["date_min"].get<std::string>());
  }
  if (j.contains("date_max")) {
    c.date_max = parse_iso_date(j["date_max"].get<std::string>());
  }
  if (j.contains("offset_pool")) {
    c.offset_pool.clear();
    for (const auto& e : j["offset_pool"]) {
      c.offset_pool.push_back(
          {e.at("days").get<int>(), e.at("weight").get<double>()});
    }
  }
  if (j.contains("min_chars")) c.min_chars = j["min_chars"].get<int>();
  if (j.contains("max_chars")) c.max_chars = j["max_chars"].get<int>();
  c.validate();
  return c;
}

nlohmann::ordered_json GeneratorConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_notes"] = n_notes;
  j["item_count_probs"] = item_count_probs;
  j["extra_untimed_action_prob"] = extra_untimed_action_prob;
  j["historical_distractor_prob"] = historical_distractor_prob;
  j["date_min"] = format_iso_date(date_min);
  j["date_max"] = format_iso_date(date_max);
  j["offset_pool"] = nlohmann::ordered_json::array();
  for (const auto& e : offset_pool) {
    j["offset_pool"].push_back({{"days", e.days}, {"weight", e.weight}});
  }
  j["min_chars"] = min_chars;
  j["max_chars"] = max_chars;
  return j;
}

void GeneratorConfig::validate() const {
  if (n_notes < 0) throw ConfigError("n_notes must be >= 0");
  double sum = 0.0;
  for (double p : item_count_probs) {
    if (p < 0.0) throw ConfigError("item count probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("item count probabilities must sum to 1");
  }
  if (days_between(date_min, date_max) < 0) {
    throw ConfigError("empty visit-date window");
  }
  if (offset_pool.empty()) throw ConfigError("offset pool must be non-empty");
  for (const auto& e : offset_pool) {
    if (e.days < 0) throw ConfigError("gold offsets must be >= 0");
    if (e.weight < 0.0) throw ConfigError("offset weights must be >= 0");
  }
  if (extra_untimed_action_prob < 0.0 || extra_untimed_action_prob > 1.0 ||
      historical_distractor_prob < 0.0 || historical_distractor_prob > 1.0) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }
  if (min_chars <= 0 || max_chars < min_chars) {
    throw ConfigError("invalid note length band");
  }
}

namespace {

Note generate_note(const GeneratorConfig& config, const Ontology& ontology,
                   const TemplateSet& tpl, std::uint64_t master_seed,
                   int index) {
  Xoshiro256ss rng(derive_seed(master_seed, static_cast<std::uint64_t>(index)));
  Note note;
  {
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "note-%06d", index);
    note.id = idbuf;
  }
  note.specialty = static_cast<Specialty>(rng.below(kNumSpecialties));
  int window = days_between(config.date_min, config.date_max) + 1;
  note.visit_date = add_days(config.date_min, static_cast<int>(rng.below(window)));

  std::vector<double> item_probs(config.item_count_probs.begin(),
                                 config.item_count_probs.end());
  int n_items = static_cast<int>(rng.pick_weighted(item_probs));

  auto specialty_labels = ontology.labels_for_specialty(note.specialty);
  // Weighted draw without replacement, down-weighting labels shared with
  // other specialties so every action gets comparable corpus-wide mass.
  std::vector<std::size_t> label_order;
  {
    std::vector<std::size_t> remaining(specialty_labels.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<double> weights;
    for (const auto* l : specialty_labels) {
      weights.push_back(1.0 / static_cast<double>(l->specialties.size()));
    }
    while (!remaining.empty()) {
      std::size_t k = rng.pick_weighted(weights);
      label_order.push_back(remaining[k]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(k));
      weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }

  bool extra_untimed = rng.unit() < config.extra_untimed_action_prob &&
                       specialty_labels.size() >
                           static_cast<std::size_t>(n_items);

  std::vector<double> offset_weights;
  for (const auto& e : config.offset_pool) offset_weights.push_back(e.weight);

  // ---- plan section (relative offsets; shifted after padding) ----
  std::string plan;
  std::vector<PendingSpan> plan_spans;
  int next_entity = 0;
  std::string plan_header = tpl.plan_headers[rng.below(6)];
  bool bullets = rng.unit() < 0.4;
  plan += plan_header;
  plan += "\n";
  auto append_sentence = [&](const std::string& sentence,
                             std::vector<PendingSpan> spans) {
    std::string prefix = bullets ? "- " : "";
    int base = static_cast<int>(plan.size() + prefix.size());
    plan += prefix;
    plan += sentence;
    plan += "\n";
    for (PendingSpan& s : spans) {
      s.start += base;
      plan_spans.push_back(std::move(s));
    }
  };

  if (n_items == 0 && !extra_untimed) {
    append_sentence(
        tpl.zero_action_plan_sentences[rng.below(
            tpl.zero_action_plan_sentences.size())],
        {});
  }

  for (int item = 0; item < n_items; ++item) {
    const ActionLabel* label = specialty_labels[label_order[item]];
    // Surface: canonical name or one of its display aliases.
    std::string test_surface = label->name;
    if (!label->aliases.empty() && rng.unit() < 0.45) {
      test_surface = label->aliases[rng.below(label->aliases.size())];
    }
    int offset = config.offset_pool[rng.pick_weighted(offset_weights)].days;
    TimePhraseChoice time = sample_time_phrase(offset, tpl, rng);

    const std::vector<std::string>* pool = nullptr;
    bool time_leads = false;
    if (time.role == "noun") {
      pool = &tpl.item_templates_noun;
    } else if (time.role == "clause") {
      pool = &tpl.item_templates_clause;
      time_leads = true;  // clause templates start with the phrase
    } else if (rng.unit() < 0.15) {
      pool = &tpl.item_templates_time_first;
      time_leads = true;
    } else {
      pool = &tpl.item_templates_adverbial;
    }
    const std::string& item_template = (*pool)[rng.below(pool->size())];
    // Only capitalize when the phrase actually opens the sentence.
    bool leads = time_leads && item_template.rfind("{TIME}", 0) == 0;

    int test_id = next_entity++;
    int time_id = next_entity++;
    std::vector<PendingSpan> spans;
    std::string sentence = render_item(item_template, test_surface,
                                       time.surface, leads, test_id, time_id,
                                       &spans);
    append_sentence(sentence, std::move(spans));
    note.links.push_back({test_id, time_id});
  }

  if (extra_untimed) {
    const ActionLabel* label = specialty_labels[label_order[n_items]];
    std::string surface = label->name;
    int test_id = next_entity++;
    const std::string& t = tpl.untimed_action_templates[rng.below(
        tpl.untimed_action_templates.size())];
    std::vector<PendingSpan> spans;
    std::string sentence =
        render_item(t, surface, "", false, test_id, -1, &spans);
    // render_item never emits a TIME span here; the template has no {TIME}
    append_sentence(sentence, std::move(spans));
    note.links.push_back({test_id, std::nullopt});
  }

  // ---- prefix sections ----
  std::string prefix;
  {
    std::string header = tpl.header_templates[rng.below(
        tpl.header_templates.size())];
    header = replace_all(header, "{PATIENT}",
                         tpl.patient_names[rng.below(tpl.patient_names.size())]);
    header = replace_all(header, "{DATE}", format_iso_date(note.visit_date));
    header = replace_all(header, "{PROVIDER}",
                         tpl.provider_names[rng.below(
                             tpl.provider_names.size())]);
    header = replace_all(header, "{SPECIALTY}",
                         std::string(specialty_name(note.specialty)));
    prefix += header;
  }
  {
    const auto& openers =
        tpl.hpi_openers.at(std::string(specialty_name(note.specialty)));
    prefix += openers[rng.below(openers.size())];
    int extra = static_cast<int>(rng.below(3));
    std::vector<std::size_t> order(tpl.hpi_extra.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (int i = 0; i < extra; ++i) {
      prefix += " ";
      prefix += tpl.hpi_extra[order[i]];
    }
    if (rng.unit() < config.historical_distractor_prob) {
      int n_distract = 1 + static_cast<int>(rng.below(2));
      std::vector<std::size_t> dorder(tpl.historical_distractors.size());
      for (std::size_t i = 0; i < dorder.size(); ++i) dorder[i] = i;
      rng.shuffle(dorder);
      for (int i = 0; i < n_distract; ++i) {
        prefix += " ";
        prefix += tpl.historical_distractors[dorder[i]];
      }
    }
    prefix += "\n\n";
  }
  {
    int n_exam = 2 + static_cast<int>(rng.below(2));
    std::vector<std::size_t> order(tpl.exam_sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (int i = 0; i < n_exam; ++i) {
      if (i > 0) prefix += " ";
      prefix += tpl.exam_sentences[order[i]];
    }
  }
  // Pad with filler until the finished note reaches the minimum length.
  {
    std::vector<std::size_t> order(tpl.filler_sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t fi = 0;
    while (static_cast<int>(prefix.size() + 2 + plan.size()) <
           config.min_chars) {
      prefix += " ";
      prefix += tpl.filler_sentences[order[fi % order.size()]];
      ++fi;
    }
  }
  prefix += "\n\n";

  note.text = prefix + plan;
  int shift = static_cast<int>(prefix.size());
  for (const PendingSpan& s : plan_spans) {
    EntitySpan e;
    e.entity_id = s.entity_id;
    e.kind = s.kind;
    e.start = s.start + shift;
    e.end = e.start + static_cast<int>(s.surface.size());
    e.surface = s.surface;
    note.entities.push_back(e);
  }
  std::sort(note.entities.begin(), note.entities.end(),
            [](const EntitySpan& a, const EntitySpan& b) {
              return a.start < b.start;
            });

  // Gold pairs derive from the symbolic stages by construction.
  for (const ScheduledForLink& l : note.links) {
    if (!l.time_entity_id) continue;
    const EntitySpan* test = note.entity(l.test_entity_id);
    const EntitySpan* time = note.entity(*l.time_entity_id);
    const ActionLabel* label = ontology.canonicalize(test->surface);
    if (!label) {
      throw GenerationInvariantError("generated TEST surface \"" +
                                     test->surface +
                                     "\" does not canonicalize");
    }
    auto trace = try_normalize(time->surface);
    if (!trace) {
      throw GenerationInvariantError("generated TIME surface \"" +
                                     time->surface + "\" does not normalize");
    }
    note.pairs.insert({label->name, trace->offset_days});
  }

  int len = static_cast<int>(note.text.size());
  if (len < config.min_chars || len > config.max_chars) {
    throw GenerationInvariantError("note " + note.id + " length " +
                                   std::to_string(len) +
                                   " outside configured band");
  }
  try {
    note.validate(&ontology);
  } catch (const ValidationError& e) {
    throw GenerationInvariantError(e.what());
  }
  return note;
}

}  // namespace

std::vector<Note> generate_corpus(const GeneratorConfig& config,
                                  const Ontology& ontology,
                                  const TemplateSet& templates,
                                  std::uint64_t seed) {
  config.validate();
  std::vector<Note> notes;
  notes.reserve(config.n_notes);
  for (int i = 0; i < config.n_notes; ++i) {
    notes.push_back(generate_note(config, ontology, templates, seed, i));
  }
  return notes;
}

StatsReport corpus_stats(const std::vector<Note>& notes,
                         const TemplateSet& templates, int top_k) {
  StatsReport r;
  r.n_notes = static_cast<int>(notes.size());
  std::map<std::string, int> action_counts;
  std::map<std::string, int> phrase_counts;
  std::vector<int> lengths;
  int multi = 0, zero = 0, historical = 0;
  for (const Note& n : notes) {
    r.notes_per_specialty[std::string(specialty_name(n.specialty))]++;
    std::size_t items = n.pairs.size();
    if (items <= 2) r.item_count_histogram[items]++;
    if (items >= 2) ++multi;
    if (items == 0) ++zero;
    lengths.push_back(static_cast<int>(n.text.size()));
    for (const EntitySpan& e : n.entities) {
      if (e.kind == EntityKind::kTime) {
        phrase_counts[e.surface]++;
      } else {
        action_counts[e.surface]++;
        ++r.total_action_mentions;
      }
    }
    for (const std::string& d : templates.historical_distractors) {
      if (n.text.find(d) != std::string::npos) {
        ++historical;
        break;
      }
    }
    for (const std::string& h : templates.plan_headers) {
      if (n.text.find("\n" + h + "\n") != std::string::npos) {
        r.plan_header_counts[h]++;
        break;
      }
    }
  }
  if (!lengths.empty()) {
    std::sort(lengths.begin(), lengths.end());
    r.length_min = lengths.front();
    r.length_max = lengths.back();
    r.length_median = lengths[lengths.size() / 2];
  }
  r.distinct_time_surfaces = static_cast<int>(phrase_counts.size());
  auto top = [&](const std::map<std::string, int>& counts) {
    std::vector<std::pair<std::string, int>> v(counts.begin(), counts.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (static_cast<int>(v.size()) > top_k) v.resize(top_k);
    return v;
  };
  r.top_actions = top(action_counts);
  r.top_time_phrases = top(phrase_counts);
  if (r.n_notes > 0) {
    r.multi_action_fraction = static_cast<double>(multi) / r.n_notes;
    r.zero_action_fraction = static_cast<double>(zero) / r.n_notes;
    r.historical_mention_fraction =
        static_cast<double>(historical) / r.n_notes;
  }
  return r;
}

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_notes"] = n_notes;
  j["notes_per_specialty"] = notes_per_specialty;
  j["item_count_histogram"] = item_count_histogram;
  j["length_min"] = length_min;
  j["length_median"] = length_median;
  j["length_max"] = length_max;
  j["distinct_time_surfaces"] = distinct_time_surfaces;
  j["total_action_mentions"] = total_action_mentions;
  j["top_actions"] = nlohmann::ordered_json::array();
  for (const auto& [k, v] : top_actions) {
    j["top_actions"].push_back({{"surface", k}, {"count", v}});
  }
  j["top_time_phrases"] = nlohmann::ordered_json::array();
  for (const auto& [k, v] : top_time_phrases) {
    j["top_time_phrases"].push_back({{"surface", k}, {"count", v}});
  }
  j["multi_action_fraction"] = multi_action_fraction;
  j["zero_action_fraction"] = zero_action_fraction;
  j["historical_mention_fraction"] = historical_mention_fraction;
  j["plan_header_counts"] = plan_header_counts;
  return j;
}

}  // namespace followup
