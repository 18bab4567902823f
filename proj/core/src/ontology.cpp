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

#include "followup/ontology.hpp"

#include <cctype>
#include <fstream>

#include "followup/errors.hpp"

namespace followup {

namespace {

constexpr std::string_view kSpecialtyNames[] = {
    "Orthopedic", "Cardiopulmonary", "Gastroenterology", "Neurology",
    "GeneralMedicine"};

constexpr std::string_view kCategoryNames[] = {
    "imaging", "lab_or_procedural_test", "procedure", "consult",
    "rehab_wellness"};

bool is_edge_punct(unsigned char c) {
  return std::ispunct(c) != 0;
}

}  // namespace

std::string_view specialty_name(Specialty s) {
  return kSpecialtyNames[static_cast<int>(s)];
}

Specialty specialty_from_name(std::string_view name) {
  for (int i = 0; i < kNumSpecialties; ++i) {
    if (kSpecialtyNames[i] == name) return static_cast<Specialty>(i);
  }
  throw ParseError("unknown specialty: \"" + std::string(name) + "\"");
}

std::string_view category_name(ActionCategory c) {
  return kCategoryNames[static_cast<int>(c)];
}

ActionCategory category_from_name(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kCategoryNames[i] == name) return static_cast<ActionCategory>(i);
  }
  throw ParseError("unknown action category: \"" + std::string(name) + "\"");
}

std::string Ontology::normalize_mention(std::string_view mention) {
  std::size_t begin = 0;
  std::size_t end = mention.size();
  while (begin < end && (is_edge_punct(mention[begin]) ||
                         std::isspace(static_cast<unsigned char>(mention[begin])))) {
    ++begin;
  }
  while (end > begin && (is_edge_punct(mention[end - 1]) ||
                         std::isspace(static_cast<unsigned char>(mention[end - 1])))) {
    --end;
  }
  std::string out;
  out.reserve(end - begin);
  bool pending_space = false;
  for (std::size_t i = begin; i < end; ++i) {
    unsigned char c = mention[i];
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

Ontology Ontology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ontology file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed ontology JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

Ontology Ontology::from_json(const nlohmann::ordered_json& j) {
  Ontology o;
  try {
    if (!j.contains("labels") || !j["labels"].is_array()) {
      throw ParseError("ontology file missing \"labels\" array");
    }
    for (const auto& lj : j["labels"]) {
      ActionLabel label;
      label.id = lj.at("id").get<int>();
      label.name = lj.at("name").get<std::string>();
      label.category = category_from_name(lj.at("category").get<std::string>());
      for (const auto& sj : lj.at("specialties")) {
        label.specialties.push_back(
            specialty_from_name(sj.get<std::string>()));
      }
      for (const auto& aj : lj.at("aliases")) {
        label.aliases.push_back(aj.get<std::string>());
      }
      o.labels_.push_back(std::move(label));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed ontology entry: ") + e.what());
  }
  o.build_index();
  return o;
}

void Ontology::build_index() {
  if (static_cast<int>(labels_.size()) != kNumActionLabels) {
    throw ValidationError("ontology must contain exactly " +
                          std::to_string(kNumActionLabels) + " labels, got " +
                          std::to_string(labels_.size()));
  }
  for (int i = 0; i < size(); ++i) {
    const ActionLabel& label = labels_[i];
    if (label.id != i) {
      throw ValidationError("label ids must be contiguous 0.." +
                            std::to_string(kNumActionLabels - 1) +
                            "; got id " + std::to_string(label.id) +
                            " at position " + std::to_string(i));
    }
    if (!name_index_.emplace(label.name, i).second) {
      throw ValidationError("duplicate canonical name: \"" + label.name + "\"");
    }
    if (label.specialties.empty()) {
      throw ValidationError("label \"" + label.name +
                            "\" belongs to no specialty");
    }
  }
  for (int i = 0; i < size(); ++i) {
    // The canonical name is always its own alias.
    std::vector<std::string> keys = {labels_[i].name};
    keys.insert(keys.end(), labels_[i].aliases.begin(),
                labels_[i].aliases.end());
    for (const std::string& key : keys) {
      std::string norm = normalize_mention(key);
      if (norm.empty()) {
        throw ValidationError("empty alias for label \"" + labels_[i].name +
                              "\"");
      }
      auto [it, inserted] = alias_index_.emplace(norm, i);
      if (!inserted && it->second != i) {
        throw ValidationError("alias \"" + key + "\" maps to both \"" +
                              labels_[it->second].name + "\" and \"" +
                              labels_[i].name + "\"");
      }
    }
  }
}

nlohmann::ordered_json Ontology::to_json() const {
  nlohmann::ordered_json j;
  j["labels"] = nlohmann::ordered_json::array();
  for (const ActionLabel& label : labels_) {
    nlohmann::ordered_json lj;
    lj["id"] = label.id;
    lj["name"] = label.name;
    lj["category"] = category_name(label.category);
    auto specs = nlohmann::ordered_json::array();
    for (Specialty s : label.specialties) specs.push_back(specialty_name(s));
    lj["specialties"] = specs;
    lj["aliases"] = label.aliases;
    j["labels"].push_back(std::move(lj));
  }
  return j;
}

void Ontology::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ontology file: " + path);
  out << to_json().dump(2) << "\n";
}

const ActionLabel* Ontology::canonicalize(std::string_view mention) const {
  auto it = alias_index_.find(normalize_mention(mention));
  if (it == alias_index_.end()) return nullptr;
  return &labels_[it->second];
}

std::vector<const ActionLabel*> Ontology::labels_for_specialty(
    Specialty s) const {
  std::vector<const ActionLabel*> out;
  for (const ActionLabel& label : labels_) {
    for (Specialty ls : label.specialties) {
      if (ls == s) {
        out.push_back(&label);
        break;
      }
    }
  }
  return out;
}

const ActionLabel* Ontology::by_name(std::string_view name) const {
  auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return nullptr;
  return &labels_[it->second];
}

std::string default_ontology_path() {
  return std::string(FOLLOWUP_DATA_DIR) + "/ontology.json";
}

}  // namespace followup
