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
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "followup/errors.hpp"
#include "followup/model.hpp"
#include "followup/rng.hpp"
#include "followup/train.hpp"
#include "test_util.hpp"

using namespace followup;

namespace {

ModelConfig tiny_config() {
  ModelConfig mc;
  mc.encoder.hidden_dim = 16;
  mc.encoder.word_buckets = 512;
  mc.encoder.ngram_buckets = 256;
  mc.encoder.max_window_tokens = 64;
  mc.encoder.window_stride = 16;
  mc.width_emb_dim = 8;
  mc.dist_emb_dim = 8;
  mc.gazetteer = {"mri brain", "echocardiogram", "emg", "colonoscopy"};
  return mc;
}

std::vector<Note> grad_notes() {
  using EK = EntityKind;
  std::vector<Note> notes;
  notes.push_back(testutil::make_note(
      "g0", "Plan: MRI Brain in 2 weeks. Order Echocardiogram today.",
      {{EK::kTest, "MRI Brain"},
       {EK::kTime, "in 2 weeks"},
       {EK::kTest, "Echocardiogram"},
       {EK::kTime, "today"}},
      {{0, 1}, {2, 3}}));
  notes.push_back(testutil::make_note("g1", "Follow up EMG x2w if tolerated.",
                                      {{EK::kTest, "EMG"}, {EK::kTime, "x2w"}},
                                      {{0, 1}}));
  notes.push_back(testutil::make_note("g2",
                                      "Schedule Colonoscopy at next visit.",
                                      {{EK::kTest, "Colonoscopy"}}, {{0, -1}}));
  return notes;
}

// Central-difference check of loss_and_grad over sampled coordinates.
void check_gradients(const Model& model, const std::vector<const Note*>& batch,
                     const TrainConfig& tc, std::uint64_t salt, int n_samples,
                     double tol) {
  std::vector<double> grad;
  Model probe(model.config(), model.params());
  probe.loss_and_grad(batch, tc, &grad, salt);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (std::abs(grad[i]) > 1e-10) active.push_back(i);
  }
  REQUIRE(static_cast<int>(active.size()) >= n_samples);
  Xoshiro256ss rng(77);
  rng.shuffle(active);
  active.resize(n_samples);

  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t idx : active) {
    double saved = probe.params().flat()[idx];
    probe.params().flat()[idx] = saved + eps;
    double up = probe.loss_and_grad(batch, tc, nullptr, salt);
    probe.params().flat()[idx] = saved - eps;
    double down = probe.loss_and_grad(batch, tc, nullptr, salt);
    probe.params().flat()[idx] = saved;
    double fd = (up - down) / (2.0 * eps);
    double rel =
        std::abs(grad[idx] - fd) / std::max(1e-6, std::abs(grad[idx]) + std::abs(fd));
    worst = std::max(worst, rel);
  }
  CAPTURE(worst);
  CHECK(worst <= tol);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("distance buckets follow the log-width table") {
    CHECK(distance_bucket(0) == 0);
    CHECK(distance_bucket(1) == 1);
    CHECK(distance_bucket(2) == 2);
    CHECK(distance_bucket(3) == 2);
    CHECK(distance_bucket(4) == 3);
    CHECK(distance_bucket(7) == 3);
    CHECK(distance_bucket(8) == 4);
    CHECK(distance_bucket(1023) == 10);
    CHECK(distance_bucket(1024) == 11);
    CHECK(distance_bucket(1 << 20) == 11);
  }

  TEST_CASE("width buckets clamp at nine tokens") {
    CHECK(width_bucket(1) == 0);
    CHECK(width_bucket(2) == 1);
    CHECK(width_bucket(8) == 7);
    CHECK(width_bucket(9) == 8);
    CHECK(width_bucket(50) == 8);
  }

  TEST_CASE("param store lays out named tensors contiguously") {
    ParamStore ps;
    ps.add("a", 2, 3);
    ps.add("b", 1, 4);
    ps.finalize();
    CHECK(ps.size() == 10);
    CHECK(ps.spec("a").offset == 0);
    CHECK(ps.spec("b").offset == 6);
    ps.tensor("b")[3] = 7.5;
    CHECK(ps.flat()[9] == 7.5);
    CHECK_THROWS_AS(ps.spec("missing"), ConfigError);
  }

  TEST_CASE("gold bio tagging requires full containment") {
    std::string text = "Order MRI Brain now";
    auto toks = tokenize(text);
    std::vector<EntitySpan> ents;
    EntitySpan e;
    e.entity_id = 0;
    e.kind = EntityKind::kTest;
    e.start = 6;
    e.end = 15;  // "MRI Brain"
    e.surface = "MRI Brain";
    ents.push_back(e);
    auto tags = gold_bio_tags(toks, ents);
    REQUIRE(tags.size() == toks.size());
    CHECK(tags[0] == BioLabel::kO);
    CHECK(tags[1] == BioLabel::kBTest);
    CHECK(tags[2] == BioLabel::kITest);
    CHECK(tags[3] == BioLabel::kO);
  }

  TEST_CASE("bio decode round trips gold tags") {
    for (const Note& n : testutil::small_corpus()) {
      auto toks = tokenize(n.text);
      auto tags = gold_bio_tags(toks, n.entities);
      auto decoded = decode_bio(tags, toks, n.text);
      // Every decoded span must exactly cover the tokens of a gold span
      // whose boundaries are token-aligned, which generator spans are.
      REQUIRE(decoded.size() == n.entities.size());
      std::vector<EntitySpan> gold = n.entities;
      std::sort(gold.begin(), gold.end(),
                [](const EntitySpan& a, const EntitySpan& b) {
                  return a.start < b.start;
                });
      for (std::size_t i = 0; i < decoded.size(); ++i) {
        CHECK(decoded[i].kind == gold[i].kind);
        CHECK(decoded[i].start == gold[i].start);
        CHECK(decoded[i].end == gold[i].end);
        CHECK(decoded[i].surface == gold[i].surface);
      }
    }
  }

  TEST_CASE("dangling inside tags open a new span") {
    std::string text = "MRI Brain now";
    auto toks = tokenize(text);
    std::vector<BioLabel> tags{BioLabel::kITest, BioLabel::kITest,
                               BioLabel::kO};
    auto spans = decode_bio(tags, toks, text);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].kind == EntityKind::kTest);
    CHECK(spans[0].surface == "MRI Brain");
  }

  TEST_CASE("kind switch inside a run starts a fresh span") {
    std::string text = "EMG today";
    auto toks = tokenize(text);
    std::vector<BioLabel> tags{BioLabel::kBTest, BioLabel::kITime};
    auto spans = decode_bio(tags, toks, text);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].kind == EntityKind::kTest);
    CHECK(spans[1].kind == EntityKind::kTime);
  }

  TEST_CASE("merge_spans dedupes, unions overlaps, and renumbers") {
    std::string text = "Order MRI Brain in 2 weeks.";
    auto span = [&](EntityKind k, int start, int end) {
      EntitySpan e;
      e.kind = k;
      e.start = start;
      e.end = end;
      e.surface = text.substr(start, end - start);
      return e;
    };
    std::vector<EntitySpan> raw{
        span(EntityKind::kTime, 16, 26),  // "in 2 weeks"
        span(EntityKind::kTest, 6, 15),   // "MRI Brain"
        span(EntityKind::kTest, 6, 15),   // duplicate from a second window
        span(EntityKind::kTest, 6, 9),    // overlapping fragment "MRI"
    };
    auto merged = merge_spans(raw, text);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].entity_id == 0);
    CHECK(merged[1].entity_id == 1);
    CHECK(merged[0].surface == "MRI Brain");
    CHECK(merged[1].surface == "in 2 weeks");
  }

  TEST_CASE("token_range finds fully contained tokens") {
    std::string text = "Order MRI Brain now";
    auto toks = tokenize(text);
    auto r = token_range(toks, 6, 15);
    REQUIRE(r.has_value());
    CHECK(r->first == 1);
    CHECK(r->second == 2);
    CHECK(!token_range(toks, 7, 8).has_value());
  }

  TEST_CASE("initialization is deterministic in the seed") {
    ModelConfig mc = tiny_config();
    Model a(mc, 5), b(mc, 5), c(mc, 6);
    CHECK(a.params().flat() == b.params().flat());
    CHECK(a.params().flat() != c.params().flat());
  }

  TEST_CASE("forward pass produces normalized distributions") {
    Model m(tiny_config(), 5);
    auto enc = m.encode("Order MRI Brain in 2 weeks. Then rest.");
    REQUIRE(!enc.windows.empty());
    auto probs = m.tag_probs(enc, 0);
    REQUIRE(probs.size() ==
            static_cast<std::size_t>(enc.windows[0].token_end -
                                     enc.windows[0].token_begin));
    for (const auto& row : probs) {
      double sum = 0.0;
      for (double p : row) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    TokenSpan test{1, 2, 6};
    TokenSpan time{3, 5, 16};
    auto rep = m.span_rep(enc, 0, test);
    CHECK(static_cast<int>(rep.size()) == m.config().span_rep_dim());
    auto dist = m.link_distribution(enc, 0, test, {time});
    REQUIRE(dist.size() == 2);
    CHECK(dist[0] + dist[1] == doctest::Approx(1.0).epsilon(1e-9));
    auto none_only = m.link_distribution(enc, 0, test, {});
    REQUIRE(none_only.size() == 1);
    CHECK(none_only[0] == 1.0);
  }

  TEST_CASE("loss is deterministic and dropout salt reproducible") {
    Model m(tiny_config(), 5);
    // Word embeddings start at zero, which would make masking invisible;
    // give them mass so dropout has an observable effect.
    {
      const auto& spec = m.params().spec("emb_word");
      double* w = m.params().tensor("emb_word");
      for (int i = 0; i < spec.rows * spec.cols; ++i) w[i] = 0.05;
    }
    auto notes = grad_notes();
    std::vector<const Note*> batch;
    for (const Note& n : notes) batch.push_back(&n);
    TrainConfig tc;
    tc.word_dropout = 0.5;
    double a = m.loss_and_grad(batch, tc, nullptr, 0);
    double b = m.loss_and_grad(batch, tc, nullptr, 0);
    CHECK(a == b);
    double s1 = m.loss_and_grad(batch, tc, nullptr, 999);
    double s2 = m.loss_and_grad(batch, tc, nullptr, 999);
    CHECK(s1 == s2);
    CHECK(s1 != a);
  }

  TEST_CASE("analytic gradients match finite differences") {
    Model m(tiny_config(), 5);
    auto notes = grad_notes();
    std::vector<const Note*> batch;
    for (const Note& n : notes) batch.push_back(&n);
    TrainConfig tc;
    tc.word_dropout = 0.0;
    check_gradients(m, batch, tc, 0, 80, 1e-4);
  }

  TEST_CASE("gradients stay exact under dropout masking") {
    Model m(tiny_config(), 6);
    auto notes = grad_notes();
    std::vector<const Note*> batch;
    for (const Note& n : notes) batch.push_back(&n);
    TrainConfig tc;
    tc.word_dropout = 0.4;
    check_gradients(m, batch, tc, 31337, 40, 1e-4);
  }

  TEST_CASE("checkpoint round trips bitwise") {
    ModelConfig mc = tiny_config();
    Model m(mc, 12);
    auto tmp = testutil::temp_file("followup_ckpt_roundtrip.bin");
    save_checkpoint(tmp.string(), m, {{"purpose", "test"}});
    Model back = load_checkpoint(tmp.string());
    CHECK(back.config().to_json() == m.config().to_json());
    CHECK(back.params().flat() == m.params().flat());
  }

  TEST_CASE("corrupt checkpoints are rejected") {
    auto tmp = testutil::temp_file("followup_ckpt_bad.bin");
    {
      std::ofstream out(tmp, std::ios::binary);
      out << "NOTACKPT garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.string()), ParseError);
  }

  TEST_CASE("training is bit-deterministic") {
    auto notes = grad_notes();
    std::vector<const Note*> ptrs;
    for (const Note& n : notes) ptrs.push_back(&n);
    TrainConfig tc;
    tc.max_epochs = 2;
    tc.patience = 2;
    tc.batch_size = 2;
    auto a = train_model(tiny_config(), tc, ptrs, ptrs);
    auto b = train_model(tiny_config(), tc, ptrs, ptrs);
    CHECK(a.model->params().flat() == b.model->params().flat());
    CHECK(a.best_val_loss == b.best_val_loss);
  }

  TEST_CASE("a ten note corpus is memorized to near-zero loss") {
    const auto& corpus = testutil::small_corpus();
    std::vector<const Note*> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(&corpus[i]);
    ModelConfig mc;
    mc.gazetteer = gazetteer_from(testutil::ontology());
    TrainConfig tc;
    tc.word_dropout = 0.0;
    tc.lr = 3e-3;
    tc.batch_size = 10;
    tc.max_epochs = 120;
    tc.patience = 120;
    tc.seed = 1;
    auto result = train_model(mc, tc, ten, ten);
    CAPTURE(result.best_val_loss);
    CHECK(result.best_val_loss < 0.01);
  }

  TEST_CASE("gazetteer aliases are normalized and sorted") {
    auto gaz = gazetteer_from(testutil::ontology());
    CHECK(std::is_sorted(gaz.begin(), gaz.end()));
    CHECK(std::adjacent_find(gaz.begin(), gaz.end()) == gaz.end());
    for (const std::string& g : gaz) {
      CHECK(g == Ontology::normalize_mention(g));
    }
    // Canonical names themselves must be present.
    CHECK(std::binary_search(gaz.begin(), gaz.end(), std::string("emg")));
  }
}
