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

// End-to-end glue: prompts -> model answers -> features -> model inputs, plus
// the ablation grids and the paired baseline/semantic experiment runner.

#ifndef SEMCAST_PIPELINE_H_
#define SEMCAST_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "semcast/metrics.h"
#include "semcast/mllm_client.h"
#include "semcast/predictor.h"
#include "semcast/prompt_builder.h"
#include "semcast/response_parser.h"
#include "semcast/scene_model.h"
#include "semcast/semantic_schema.h"
#include "semcast/trainer.h"

namespace semcast {

struct PromptJob {
  PromptPayload payload;
  const Scenario* scenario = nullptr;
};

// Prompts for every scenario at steps t0 - round(delay * hz) for each delay;
// steps before the first frame are skipped. Per step: the vehicle and
// pedestrian prompts (when any agent of the category is visible) and the
// scene prompt.
std::vector<PromptJob> BuildPromptJobs(const std::vector<Scenario>& scenarios,
                                       const std::vector<double>& delays_s,
                                       const VisibilityFilter& filter = {});

struct Extraction {
  std::vector<FeatureRecord> features;
  std::vector<ParseReportRow> reports;
};

// exchanges[i] answers jobs[i].
Extraction ParseExchanges(const std::vector<PromptJob>& jobs,
                          const std::vector<MllmExchange>& exchanges);

// scenario_id -> step -> semantic inputs.
using SemanticIndex = std::map<std::string, SemanticsByStep>;
SemanticIndex IndexFeatures(const std::vector<FeatureRecord>& features);

// Query + parse + index in one call.
SemanticIndex ExtractSemantics(const std::vector<Scenario>& scenarios, MllmClient& client,
                               const std::vector<double>& delays_s,
                               std::vector<ParseReportRow>* reports = nullptr);

// Keeps only the agent segments of `groups` (occlusion answers travel with
// the type group); the scene vector survives only if kScene is listed.
SemanticInputs MaskGroups(const SemanticInputs& in, const std::vector<QuestionGroup>& groups);

struct SampleOptions {
  double delay_s = 0.0;
  bool mask_groups = false;
  std::vector<QuestionGroup> groups;
};

// One sample per resolved target with a valid state at t0. `semantics` may be
// null (no semantic inputs).
std::vector<PreparedSample> PrepareSamples(const std::vector<Scenario>& scenarios,
                                           const SemanticIndex* semantics,
                                           const SampleOptions& options,
                                           const PredictorConfig& config);

std::vector<GroundTruth> GroundTruths(const std::vector<Scenario>& scenarios,
                                      const std::vector<PreparedSample>& samples);
std::vector<Forecast> PredictAll(const Predictor& model,
                                 const std::vector<PreparedSample>& samples);
// Mean |alpha| of the target token and of the scene gate over forecasts.
double MeanAbsAlpha(const std::vector<Forecast>& forecasts);

struct AblationRow {
  std::string label;
  bool use_semantics = true;
  std::vector<QuestionGroup> groups;  // ignored without semantics
  GainMode gain_mode = GainMode::kLearned;
  double delay_s = 0.0;
};

// Reasoning-type rows: (-), (S,I), (I,T), (S,T), (Scene), (S,I,T,Scene).
std::vector<AblationRow> ReasoningTypeGrid();
// Gain rows: added, constant, learned.
std::vector<AblationRow> GainGrid();
// Learned-gain rows evaluated with features delayed by each value.
std::vector<AblationRow> DelayGrid(const std::vector<double>& delays_s);

std::vector<QuestionGroup> AllGroups();

}  // namespace semcast

#endif  // SEMCAST_PIPELINE_H_
