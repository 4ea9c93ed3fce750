/*
 * Copyright 2026 The hedgepred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Microbenchmarks for the hot paths: encoding, SMOTE, GBDT fitting and
// exact group Shapley values.

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "hedgepred/eval.h"
#include "hedgepred/explain.h"
#include "hedgepred/resample.h"
#include "hedgepred/synthetic.h"

namespace hedgepred {
namespace {

GeneratorConfig BenchGenerator() {
  GeneratorConfig g;
  g.dyads = 4;
  g.turns_per_session = 250;
  return g;
}

struct Fixture {
  Fixture()
      : corpus(GenerateSynthetic(BenchGenerator(), 1)),
        encoder(DefaultSchema(16), MakeHashingEmbedder(16, 1)) {}
  Corpus corpus;
  TurnEncoder encoder;
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

EncodedDataset AllRows(const Fixture& f) {
  const EncodedCorpus data(f.encoder, f.corpus, 4);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return data.Select(all, FeatureMask::WithoutEmbedding(), data.FitRange(all));
}

void BM_EncodeCorpus(benchmark::State& state) {
  const auto& f = Shared();
  for (auto _ : state) {
    const EncodedCorpus data(f.encoder, f.corpus, 4);
    benchmark::DoNotOptimize(data.size());
  }
}
BENCHMARK(BM_EncodeCorpus)->Unit(benchmark::kMillisecond);

void BM_Smote(benchmark::State& state) {
  const auto ds = AllRows(Shared());
  ResampleConfig rc;
  rc.seed = 3;
  for (auto _ : state) {
    const auto r = Smote(ds.x, ds.y, rc);
    benchmark::DoNotOptimize(r.synthetic_count);
  }
}
BENCHMARK(BM_Smote)->Unit(benchmark::kMillisecond);

void BM_GbdtFit(benchmark::State& state) {
  const auto ds = AllRows(Shared());
  TrainConfig c;
  c.gbdt.trees = static_cast<int>(state.range(0));
  const TrainingData data{ds.x, ds.y, ds.window, ds.row_width, ds.fingerprint};
  for (auto _ : state) {
    const auto model = Fit(c, data);
    benchmark::DoNotOptimize(&model);
  }
}
BENCHMARK(BM_GbdtFit)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ShapleyExactGroups(benchmark::State& state) {
  const auto& f = Shared();
  const auto ds = AllRows(f);
  TrainConfig c;
  c.gbdt.trees = 50;
  const auto model = Fit(c, {ds.x, ds.y, ds.window, ds.row_width, ds.fingerprint});
  const Matrix background = SampleBackground(ds.x, static_cast<std::size_t>(state.range(0)), 2);
  const auto players = GroupPlayers(f.encoder.schema(), FeatureMask::WithoutEmbedding(), 4);
  const Matrix x = ds.x.topRows(1);
  for (auto _ : state) {
    const auto r = ExplainRows(ModelFunction(model), x, background, players,
                               ShapleyMode::kExact, 0, 1, 1);
    benchmark::DoNotOptimize(r.front().phi.data());
  }
}
BENCHMARK(BM_ShapleyExactGroups)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hedgepred

BENCHMARK_MAIN();
