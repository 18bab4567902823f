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

#include <benchmark/benchmark.h>

#include <vector>

#include "followup/generator.hpp"
#include "followup/model.hpp"
#include "followup/note.hpp"
#include "followup/ontology.hpp"
#include "followup/pipeline.hpp"
#include "followup/temporal.hpp"
#include "followup/tokenizer.hpp"

namespace {

const followup::Ontology& ontology() {
  static followup::Ontology ont =
      followup::Ontology::load(followup::default_ontology_path());
  return ont;
}

const std::vector<followup::Note>& corpus() {
  static std::vector<followup::Note> notes = [] {
    followup::GeneratorConfig cfg = followup::GeneratorConfig::defaults();
    cfg.n_notes = 64;
    followup::TemplateSet templates =
        followup::TemplateSet::load(followup::default_templates_path());
    return followup::generate_corpus(cfg, ontology(), templates, 7);
  }();
  return notes;
}

const followup::Model& model() {
  static followup::Model m = [] {
    followup::ModelConfig mc;
    mc.gazetteer = followup::gazetteer_from(ontology());
    return followup::Model(mc, 42);
  }();
  return m;
}

void BM_Normalize(benchmark::State& state) {
  static const char* phrases[] = {"in 2 weeks", "RTC 3mo", "9-week follow-up",
                                  "ten mos",    "q6mo",    "tomorrow"};
  std::size_t i = 0;
  for (auto _ : state) {
    auto t = followup::try_normalize(phrases[i++ % 6]);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_Normalize);

void BM_Tokenize(benchmark::State& state) {
  const followup::Note& n = corpus().front();
  for (auto _ : state) {
    auto toks = followup::tokenize(n.text);
    benchmark::DoNotOptimize(toks);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n.text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_GenerateNote(benchmark::State& state) {
  followup::GeneratorConfig cfg = followup::GeneratorConfig::defaults();
  cfg.n_notes = 1;
  followup::TemplateSet templates =
      followup::TemplateSet::load(followup::default_templates_path());
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto notes = followup::generate_corpus(cfg, ontology(), templates, ++seed);
    benchmark::DoNotOptimize(notes);
  }
}
BENCHMARK(BM_GenerateNote);

void BM_Encode(benchmark::State& state) {
  const followup::Note& n = corpus().front();
  for (auto _ : state) {
    auto enc = model().encode(n.text);
    benchmark::DoNotOptimize(enc);
  }
}
BENCHMARK(BM_Encode);

void BM_Extract(benchmark::State& state) {
  const followup::Note& n = corpus().front();
  for (auto _ : state) {
    auto pred = followup::extract(model(), ontology(), n);
    benchmark::DoNotOptimize(pred);
  }
}
BENCHMARK(BM_Extract);

void BM_LossAndGrad(benchmark::State& state) {
  std::vector<const followup::Note*> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(&corpus()[i]);
  followup::TrainConfig tc;
  std::vector<double> grad;
  for (auto _ : state) {
    double loss = model().loss_and_grad(batch, tc, &grad);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_LossAndGrad);

}  // namespace

BENCHMARK_MAIN();
