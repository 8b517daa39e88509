/* Copyright 2026 The semcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Forward pass and one optimizer step of the predictor.

#include <benchmark/benchmark.h>

#include "semcast/pipeline.h"
#include "semcast/predictor.h"
#include "semcast/trainer.h"

namespace semcast {
namespace {

PredictorConfig Config(int64_t d_model, bool use_semantics) {
  PredictorConfig c;
  c.d_model = static_cast<int>(d_model);
  c.num_heads = 2;
  c.d_ff = 2 * c.d_model;
  c.use_semantics = use_semantics;
  return c;
}

PreparedSample Sample(const PredictorConfig& c) {
  GeneratorConfig g;
  g.num_scenarios = 1;
  const auto scenarios = GenerateSynthetic(g, 3);
  return PrepareSamples(scenarios, nullptr, {}, c).front();
}

void BM_Forward(benchmark::State& state) {
  const PredictorConfig c = Config(state.range(0), state.range(1) != 0);
  const Predictor model(c, 1);
  const PreparedSample s = Sample(c);
  for (auto _ : state) benchmark::DoNotOptimize(model.Predict(s));
}
BENCHMARK(BM_Forward)->ArgsProduct({{32, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const PredictorConfig c = Config(state.range(0), true);
  Predictor model(c, 1);
  const PreparedSample s = Sample(c);
  TrainConfig t;
  Adam adam(model.params(), t);
  for (auto _ : state) {
    model.params().ZeroGrad();
    Graph g;
    g.Backward(model.Loss(g, model.Build(g, s), s));
    adam.Step(t.learning_rate);
  }
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace semcast

BENCHMARK_MAIN();
