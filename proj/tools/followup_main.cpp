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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "followup/errors.hpp"
#include "followup/eval.hpp"
#include "followup/generator.hpp"
#include "followup/model.hpp"
#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "followup/pipeline.hpp"
#include "followup/provenance.hpp"
#include "followup/rng.hpp"
#include "followup/splits.hpp"
#include "followup/temporal.hpp"
#include "followup/train.hpp"

namespace {

using followup::Note;
using followup::NotePrediction;
using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw followup::IoError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw followup::ParseError(path + ": invalid json: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw followup::IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw followup::IoError("short write on " + path);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw followup::IoError("cannot read " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    followup::fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

std::vector<Note> notes_for_split(const std::vector<Note>& corpus,
                                  const followup::SplitManifest& manifest,
                                  followup::SplitId split) {
  std::map<std::string, const Note*> by_id;
  for (const auto& n : corpus) by_id[n.id] = &n;
  std::vector<Note> out;
  for (const auto& id : manifest.notes_in(split)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw followup::UnknownNoteId("split references unknown note " + id);
    }
    out.push_back(*it->second);
  }
  return out;
}

struct CommonPaths {
  std::string ontology = followup::default_ontology_path();
  std::string templates = followup::default_templates_path();
};

int cmd_generate(const std::string& out, std::uint64_t seed,
                 const std::optional<std::string>& config_path,
                 std::optional<int> n_notes, const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto templates = followup::TemplateSet::load(paths.templates);
  followup::GeneratorConfig config =
      config_path ? followup::GeneratorConfig::from_json(
                        read_json_file(*config_path))
                  : followup::GeneratorConfig::defaults();
  if (n_notes) config.n_notes = *n_notes;
  config.validate();
  auto notes = followup::generate_corpus(config, ontology, templates, seed);
  Json prov = followup::make_provenance(config.to_json(),
                                        Json{{"corpus_seed", seed}});
  followup::write_corpus_jsonl(out, notes, prov);
  std::cout << "wrote " << notes.size() << " notes to " << out << "\n";
  return 0;
}

int cmd_split(const std::string& corpus_path, const std::string& out,
              std::uint64_t seed, const followup::SplitConfig& config,
              const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto notes = followup::read_corpus_jsonl(corpus_path);
  auto manifest = followup::make_splits(notes, ontology, config, seed);
  manifest.check(notes, ontology);
  Json prov = followup::make_provenance(config.to_json(),
                                        Json{{"split_seed", seed}});
  manifest.save(out, prov);
  using followup::SplitId;
  for (SplitId s : {SplitId::kTrain, SplitId::kSeenVal, SplitId::kOovVal,
                    SplitId::kSeenTest, SplitId::kOovTest,
                    SplitId::kDiscarded}) {
    std::cout << followup::split_name(s) << ": "
              << manifest.notes_in(s).size() << "\n";
  }
  std::cout << "min train notes per action type: "
            << manifest.leakage.min_train_count
            << (manifest.leakage.min_per_type_ok ? " (ok)" : " (LOW)") << "\n";
  return manifest.leakage.min_per_type_ok &&
                 manifest.leakage.oov_actions_absent_from_seen
             ? 0
             : 1;
}

int cmd_stats(const std::string& corpus_path,
              const std::optional<std::string>& out,
              const CommonPaths& paths) {
  auto templates = followup::TemplateSet::load(paths.templates);
  auto notes = followup::read_corpus_jsonl(corpus_path);
  Json j = followup::corpus_stats(notes, templates).to_json();
  if (out) {
    write_json_file(*out, j);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& splits_path,
              const std::string& out,
              const std::optional<std::string>& config_path,
              const std::optional<std::string>& log_path,
              std::optional<std::uint64_t> seed, const CommonPaths& paths) {
  auto notes = followup::read_corpus_jsonl(corpus_path);
  auto manifest = followup::SplitManifest::load(splits_path);
  followup::TrainConfig tc =
      config_path
          ? followup::TrainConfig::from_json(read_json_file(*config_path))
          : followup::TrainConfig{};
  if (seed) tc.seed = *seed;
  followup::ModelConfig mc;
  mc.gazetteer =
      followup::gazetteer_from(followup::Ontology::load(paths.ontology));

  auto train_notes = notes_for_split(notes, manifest, followup::SplitId::kTrain);
  auto val_notes =
      notes_for_split(notes, manifest, followup::SplitId::kSeenVal);
  for (auto& n :
       notes_for_split(notes, manifest, followup::SplitId::kOovVal)) {
    val_notes.push_back(std::move(n));
  }
  std::vector<const Note*> train_ptrs, val_ptrs;
  for (const auto& n : train_notes) train_ptrs.push_back(&n);
  for (const auto& n : val_notes) val_ptrs.push_back(&n);

  std::ofstream log;
  if (log_path) {
    log.open(*log_path, std::ios::trunc);
    if (!log) throw followup::IoError("cannot write " + *log_path);
  }
  auto result = followup::train_model(
      mc, tc, train_ptrs, val_ptrs, [&](const followup::EpochLog& e) {
        std::cout << "epoch " << e.epoch << " train " << e.train_loss
                  << " val " << e.val_loss << (e.improved ? " *" : "") << "\n";
        if (log) log << e.to_json().dump() << "\n";
      });
  Json prov = followup::make_provenance(
      Json{{"train", tc.to_json()}, {"model", mc.to_json()}},
      Json{{"train_seed", tc.seed}});
  prov["best_epoch"] = result.best_epoch;
  prov["best_val_loss"] = result.best_val_loss;
  followup::save_checkpoint(out, *result.model, prov);
  std::cout << "best epoch " << result.best_epoch << " val loss "
            << result.best_val_loss << "; saved " << out << "\n";
  return 0;
}

int cmd_predict(const std::string& corpus_path, const std::string& splits_path,
                const std::string& model_path, const std::string& split,
                const std::string& out, const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto notes = followup::read_corpus_jsonl(corpus_path);
  auto manifest = followup::SplitManifest::load(splits_path);
  auto model = followup::load_checkpoint(model_path);
  auto subset =
      notes_for_split(notes, manifest, followup::split_from_name(split));
  auto preds = followup::extract_batch(model, ontology, subset);
  Json prov = followup::make_provenance(
      Json{{"split", split}, {"model_digest", file_digest(model_path)}},
      Json::object());
  followup::write_predictions_jsonl(out, preds, prov);
  std::cout << "wrote " << preds.size() << " predictions to " << out << "\n";
  return 0;
}

std::vector<Note> evaluation_notes(const std::string& corpus_path,
                                   const std::optional<std::string>& splits_path,
                                   const std::optional<std::string>& split) {
  auto notes = followup::read_corpus_jsonl(corpus_path);
  if (!splits_path != !split) {
    throw followup::ConfigError("--splits and --split go together");
  }
  if (!splits_path) return notes;
  auto manifest = followup::SplitManifest::load(*splits_path);
  return notes_for_split(notes, manifest,
                         followup::split_from_name(*split));
}

std::vector<followup::NoteOutcome> outcomes_for(
    const std::string& pred_path, const std::string& format,
    const std::vector<Note>& notes, const followup::Ontology& ontology) {
  std::vector<NotePrediction> preds;
  if (format == "pairs") {
    preds = followup::read_predictions_jsonl(pred_path);
  } else if (format == "action_date") {
    auto ingest = followup::ingest_baseline(pred_path, notes, ontology);
    std::cout << pred_path << ": " << ingest.n_items << " items, "
              << ingest.n_no_match << " with unrecognized actions\n";
    preds = std::move(ingest.preds);
  } else {
    throw followup::ConfigError("unknown prediction format " + format);
  }
  return followup::score_corpus(notes, preds);
}

int cmd_evaluate(const std::string& corpus_path, const std::string& pred_path,
                 const std::string& format,
                 const std::optional<std::string>& splits_path,
                 const std::optional<std::string>& split,
                 const std::optional<std::string>& out, int replicas,
                 std::uint64_t boot_seed, const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto notes = evaluation_notes(corpus_path, splits_path, split);
  auto outcomes = outcomes_for(pred_path, format, notes, ontology);
  auto report = followup::bootstrap(outcomes, replicas, boot_seed);
  Json j = report.to_json();
  j["n_notes"] = outcomes.size();
  if (split) j["split"] = *split;
  if (out) {
    write_json_file(*out, j);
  }
  std::cout << "pair F1 " << report.point.f1 << " [" << report.f1_ci.lo << ", "
            << report.f1_ci.hi << "], precision " << report.point.precision
            << ", recall " << report.point.recall << ", MAE "
            << (report.point.mae ? std::to_string(*report.point.mae) : "null")
            << "\n";
  return 0;
}

int cmd_compare(const std::string& corpus_path, const std::string& pred_a,
                const std::string& pred_b, const std::string& format_a,
                const std::string& format_b,
                const std::optional<std::string>& splits_path,
                const std::optional<std::string>& split,
                const std::optional<std::string>& out, int replicas,
                std::uint64_t boot_seed, const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto notes = evaluation_notes(corpus_path, splits_path, split);
  auto a = outcomes_for(pred_a, format_a, notes, ontology);
  auto b = outcomes_for(pred_b, format_b, notes, ontology);
  auto cmp = followup::compare_systems(a, b, replicas, boot_seed);
  if (out) write_json_file(*out, cmp.to_json());
  std::cout << "delta F1 " << cmp.delta_f1 << " verdict " << cmp.verdict
            << "\n";
  return 0;
}

int cmd_audit(const std::string& corpus_path,
              const std::optional<std::string>& out,
              const CommonPaths& paths) {
  auto ontology = followup::Ontology::load(paths.ontology);
  auto notes = followup::read_corpus_jsonl(corpus_path);
  auto report = followup::audit_corpus(notes, ontology);
  if (out) write_json_file(*out, report.to_json());
  std::cout << report.n_notes << " notes, " << report.n_pairs << " pairs, "
            << report.n_mismatched_notes << " replay mismatches\n";
  return report.n_mismatched_notes == 0 ? 0 : 1;
}

int cmd_rules(const std::optional<std::string>& out) {
  Json j = followup::rule_table_json();
  if (out) {
    write_json_file(*out, j);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_run(const std::string& out_dir, std::uint64_t corpus_seed,
            std::uint64_t split_seed, std::uint64_t train_seed,
            const CommonPaths& paths) {
  std::filesystem::create_directories(out_dir);
  auto path = [&out_dir](const std::string& name) {
    return out_dir + "/" + name;
  };
  int rc = cmd_generate(path("corpus.jsonl"), corpus_seed, std::nullopt,
                        std::nullopt, paths);
  if (rc != 0) return rc;
  rc = cmd_split(path("corpus.jsonl"), path("splits.json"), split_seed,
                 followup::SplitConfig{}, paths);
  if (rc != 0) return rc;
  rc = cmd_train(path("corpus.jsonl"), path("splits.json"),
                 path("model.ckpt"), std::nullopt, path("train_log.jsonl"),
                 train_seed, paths);
  if (rc != 0) return rc;
  Json seeds{{"corpus_seed", corpus_seed},
             {"split_seed", split_seed},
             {"train_seed", train_seed}};
  Json manifest{{"seeds", seeds}, {"artifacts", Json::object()}};
  for (const std::string split : {"seen_test", "oov_test"}) {
    std::string pred = path("pred_" + split + ".jsonl");
    rc = cmd_predict(path("corpus.jsonl"), path("splits.json"),
                     path("model.ckpt"), split, pred, paths);
    if (rc != 0) return rc;
    rc = cmd_evaluate(path("corpus.jsonl"), pred, "pairs", path("splits.json"),
                      split, path("report_" + split + ".json"), 1000, 123,
                      paths);
    if (rc != 0) return rc;
  }
  for (const std::string name :
       {"corpus.jsonl", "splits.json", "model.ckpt", "pred_seen_test.jsonl",
        "pred_oov_test.jsonl", "report_seen_test.json",
        "report_oov_test.json", "train_log.jsonl"}) {
    manifest["artifacts"][name] = file_digest(path(name));
  }
  manifest["provenance"] = followup::make_provenance(Json::object(), seeds);
  write_json_file(path("manifest.json"), manifest);
  std::cout << "experiment complete; manifest at " << path("manifest.json")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Follow-up action extraction from outpatient notes"};
  app.set_version_flag("--version", followup::tool_version());
  app.require_subcommand(1);

  CommonPaths paths;
  app.add_option("--ontology", paths.ontology, "Action ontology json")
      ->capture_default_str();
  app.add_option("--templates", paths.templates, "Note template json")
      ->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic corpus");
  std::string gen_out = "corpus.jsonl";
  std::uint64_t gen_seed = 7;
  std::optional<std::string> gen_config;
  std::optional<int> gen_n;
  gen->add_option("--out", gen_out, "Output jsonl")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Corpus seed")->capture_default_str();
  gen->add_option("--config", gen_config, "Generator config json");
  gen->add_option("--n", gen_n, "Note count override");

  // split
  auto* spl = app.add_subcommand("split", "Build the seen/OOV split manifest");
  std::string spl_corpus, spl_out = "splits.json";
  std::uint64_t spl_seed = 13;
  followup::SplitConfig spl_config;
  spl->add_option("--corpus", spl_corpus, "Corpus jsonl")->required();
  spl->add_option("--out", spl_out, "Output json")->capture_default_str();
  spl->add_option("--seed", spl_seed, "Split seed")->capture_default_str();
  spl->add_option("--seen-val", spl_config.seen_val_target, "Seen-val size")
      ->capture_default_str();
  spl->add_option("--seen-test", spl_config.seen_test_target, "Seen-test size")
      ->capture_default_str();
  spl->add_option("--min-per-type", spl_config.min_per_type,
                  "Minimum train notes per action type")
      ->capture_default_str();

  // stats
  auto* sts = app.add_subcommand("stats", "Corpus composition report");
  std::string sts_corpus;
  std::optional<std::string> sts_out;
  sts->add_option("--corpus", sts_corpus, "Corpus jsonl")->required();
  sts->add_option("--out", sts_out, "Output json (stdout when omitted)");

  // train
  auto* trn = app.add_subcommand("train", "Train the extraction model");
  std::string trn_corpus, trn_splits, trn_out = "model.ckpt";
  std::optional<std::string> trn_config, trn_log;
  std::optional<std::uint64_t> trn_seed;
  trn->add_option("--corpus", trn_corpus, "Corpus jsonl")->required();
  trn->add_option("--splits", trn_splits, "Split manifest")->required();
  trn->add_option("--out", trn_out, "Checkpoint path")->capture_default_str();
  trn->add_option("--config", trn_config, "Training config json");
  trn->add_option("--log", trn_log, "Per-epoch jsonl log");
  trn->add_option("--seed", trn_seed, "Training seed override");

  // predict
  auto* prd = app.add_subcommand("predict", "Run extraction over a split");
  std::string prd_corpus, prd_splits, prd_model, prd_split = "seen_test";
  std::string prd_out = "predictions.jsonl";
  prd->add_option("--corpus", prd_corpus, "Corpus jsonl")->required();
  prd->add_option("--splits", prd_splits, "Split manifest")->required();
  prd->add_option("--model", prd_model, "Checkpoint path")->required();
  prd->add_option("--split", prd_split, "Split name")->capture_default_str();
  prd->add_option("--out", prd_out, "Output jsonl")->capture_default_str();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Score predictions against gold");
  std::string evl_corpus, evl_pred, evl_format = "pairs";
  std::optional<std::string> evl_splits, evl_split, evl_out;
  int evl_replicas = 1000;
  std::uint64_t evl_boot_seed = 123;
  evl->add_option("--corpus", evl_corpus, "Corpus jsonl")->required();
  evl->add_option("--pred", evl_pred, "Predictions file")->required();
  evl->add_option("--format", evl_format, "pairs | action_date")
      ->capture_default_str();
  evl->add_option("--splits", evl_splits, "Split manifest");
  evl->add_option("--split", evl_split, "Split name");
  evl->add_option("--out", evl_out, "Report json");
  evl->add_option("--replicas", evl_replicas, "Bootstrap replicas")
      ->capture_default_str();
  evl->add_option("--boot-seed", evl_boot_seed, "Bootstrap seed")
      ->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare two systems by CI overlap");
  std::string cmp_corpus, cmp_a, cmp_b;
  std::string cmp_format_a = "pairs", cmp_format_b = "pairs";
  std::optional<std::string> cmp_splits, cmp_split, cmp_out;
  int cmp_replicas = 1000;
  std::uint64_t cmp_boot_seed = 123;
  cmp->add_option("--corpus", cmp_corpus, "Corpus jsonl")->required();
  cmp->add_option("--pred-a", cmp_a, "System A predictions")->required();
  cmp->add_option("--pred-b", cmp_b, "System B predictions")->required();
  cmp->add_option("--format-a", cmp_format_a, "pairs | action_date")
      ->capture_default_str();
  cmp->add_option("--format-b", cmp_format_b, "pairs | action_date")
      ->capture_default_str();
  cmp->add_option("--splits", cmp_splits, "Split manifest");
  cmp->add_option("--split", cmp_split, "Split name");
  cmp->add_option("--out", cmp_out, "Report json");
  cmp->add_option("--replicas", cmp_replicas, "Bootstrap replicas")
      ->capture_default_str();
  cmp->add_option("--boot-seed", cmp_boot_seed, "Bootstrap seed")
      ->capture_default_str();

  // audit
  auto* aud = app.add_subcommand("audit", "Replay gold pair derivations");
  std::string aud_corpus;
  std::optional<std::string> aud_out;
  aud->add_option("--corpus", aud_corpus, "Corpus jsonl")->required();
  aud->add_option("--out", aud_out, "Report json");

  // rules
  auto* rul = app.add_subcommand("rules", "Dump the normalization rule table");
  std::optional<std::string> rul_out;
  rul->add_option("--out", rul_out, "Output json (stdout when omitted)");

  // run
  auto* run = app.add_subcommand("run", "Full experiment into a directory");
  std::string run_dir = "experiment";
  std::uint64_t run_corpus_seed = 7, run_split_seed = 13, run_train_seed = 42;
  run->add_option("--out-dir", run_dir, "Output directory")
      ->capture_default_str();
  run->add_option("--corpus-seed", run_corpus_seed, "Corpus seed")
      ->capture_default_str();
  run->add_option("--split-seed", run_split_seed, "Split seed")
      ->capture_default_str();
  run->add_option("--train-seed", run_train_seed, "Training seed")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_generate(gen_out, gen_seed, gen_config, gen_n, paths);
    }
    if (spl->parsed()) {
      return cmd_split(spl_corpus, spl_out, spl_seed, spl_config, paths);
    }
    if (sts->parsed()) return cmd_stats(sts_corpus, sts_out, paths);
    if (trn->parsed()) {
      return cmd_train(trn_corpus, trn_splits, trn_out, trn_config, trn_log,
                       trn_seed, paths);
    }
    if (prd->parsed()) {
      return cmd_predict(prd_corpus, prd_splits, prd_model, prd_split,
                         prd_out, paths);
    }
    if (evl->parsed()) {
      return cmd_evaluate(evl_corpus, evl_pred, evl_format, evl_splits,
                          evl_split, evl_out, evl_replicas, evl_boot_seed,
                          paths);
    }
    if (cmp->parsed()) {
      return cmd_compare(cmp_corpus, cmp_a, cmp_b, cmp_format_a, cmp_format_b,
                         cmp_splits, cmp_split, cmp_out, cmp_replicas,
                         cmp_boot_seed, paths);
    }
    if (aud->parsed()) return cmd_audit(aud_corpus, aud_out, paths);
    if (rul->parsed()) return cmd_rules(rul_out);
    if (run->parsed()) {
      return cmd_run(run_dir, run_corpus_seed, run_split_seed, run_train_seed,
                     paths);
    }
  } catch (const followup::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const followup::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const followup::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
