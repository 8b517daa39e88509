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

#include "semcast/pipeline.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "semcast/common.h"

namespace semcast {

std::vector<PromptJob> BuildPromptJobs(const std::vector<Scenario>& scenarios,
                                       const std::vector<double>& delays_s,
                                       const VisibilityFilter& filter) {
  std::vector<PromptJob> jobs;
  for (const Scenario& s : scenarios) {
    std::set<int> steps;
    for (double d : delays_s) {
      const int step = s.history_len - static_cast<int>(std::lround(d * s.step_hz));
      if (step >= 1) steps.insert(step);
    }
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      for (AgentCategory c : {AgentCategory::kVehicle, AgentCategory::kPedestrian}) {
        if (auto p = BuildVsaPrompt(s, c, *it, filter)) jobs.push_back({std::move(*p), &s});
      }
      jobs.push_back({BuildScPrompt(s, *it), &s});
    }
  }
  return jobs;
}

Extraction ParseExchanges(const std::vector<PromptJob>& jobs,
                          const std::vector<MllmExchange>& exchanges) {
  if (jobs.size() != exchanges.size()) {
    throw std::invalid_argument("ParseExchanges: jobs and exchanges differ in count");
  }
  Extraction out;
  for (size_t i = 0; i < jobs.size(); ++i) {
    const PromptPayload& p = jobs[i].payload;
    const std::string& raw = exchanges[i].raw_response;
    ParseReportRow row{p.scenario_id, std::string(ToString(p.kind)), ParseStatus::kEmpty, 0};
    if (p.kind == PromptKind::kSc) {
      ScParse parsed = ParseSc(raw);
      row.status = parsed.report.status;
      row.defaulted_count = parsed.report.defaulted_count();
      out.features.push_back({p.scenario_id, std::string(FeatureRecord::kSceneId), p.step,
                              AgentCategory::kOther, parsed.scene.answers,
                              parsed.scene.encoding});
    } else {
      const AgentCategory c = p.kind == PromptKind::kVsaVehicle ? AgentCategory::kVehicle
                                                                : AgentCategory::kPedestrian;
      VsaParse parsed = ParseVsa(raw, c, p.agent_order);
      row.status = parsed.report.status;
      row.defaulted_count = parsed.report.defaulted_count();
      for (AgentSemantics& a : parsed.agents) {
        out.features.push_back({p.scenario_id, a.agent_id, p.step, c, std::move(a.answers),
                                std::move(a.encoding)});
      }
    }
    out.reports.push_back(std::move(row));
  }
  return out;
}

SemanticIndex IndexFeatures(const std::vector<FeatureRecord>& features) {
  SemanticIndex index;
  for (const FeatureRecord& f : features) {
    SemanticInputs& in = index[f.scenario_id][f.step];
    if (f.is_scene()) {
      in.scene = f.encoding;
    } else {
      in.agents[f.agent_id] = f.encoding;
    }
  }
  return index;
}

SemanticIndex ExtractSemantics(const std::vector<Scenario>& scenarios, MllmClient& client,
                               const std::vector<double>& delays_s,
                               std::vector<ParseReportRow>* reports) {
  const std::vector<PromptJob> jobs = BuildPromptJobs(scenarios, delays_s);
  std::vector<QueryItem> items;
  items.reserve(jobs.size());
  for (const PromptJob& j : jobs) items.push_back({&j.payload, j.scenario});
  const std::vector<MllmExchange> exchanges = client.QueryMany(items);
  Extraction ex = ParseExchanges(jobs, exchanges);
  if (reports != nullptr) *reports = std::move(ex.reports);
  return IndexFeatures(ex.features);
}

SemanticInputs MaskGroups(const SemanticInputs& in, const std::vector<QuestionGroup>& groups) {
  std::vector<QuestionGroup> agent_groups = groups;
  const bool type = std::find(groups.begin(), groups.end(), QuestionGroup::kType) != groups.end();
  if (type) agent_groups.push_back(QuestionGroup::kOcclusion);
  const Eigen::VectorXd mask = AgentGroupMask(agent_groups);
  SemanticInputs out;
  for (const auto& [id, x] : in.agents) out.agents[id] = x.cwiseProduct(mask);
  if (in.scene &&
      std::find(groups.begin(), groups.end(), QuestionGroup::kScene) != groups.end()) {
    out.scene = in.scene;
  }
  return out;
}

std::vector<PreparedSample> PrepareSamples(const std::vector<Scenario>& scenarios,
                                           const SemanticIndex* semantics,
                                           const SampleOptions& options,
                                           const PredictorConfig& config) {
  std::vector<PreparedSample> out;
  for (const Scenario& s : scenarios) {
    SemanticInputs in;
    if (semantics != nullptr) {
      if (const auto it = semantics->find(s.scenario_id); it != semantics->end()) {
        in = LatencyShift(it->second, s.history_len, s.step_hz, options.delay_s);
      }
      if (options.mask_groups) in = MaskGroups(in, options.groups);
    }
    for (const std::string& target : s.Targets()) {
      const AgentTrack* a = s.FindAgent(target);
      if (a == nullptr || !a->at(s.history_len).valid) continue;
      out.push_back(PrepareSample(s, target, semantics != nullptr ? &in : nullptr, config));
    }
  }
  return out;
}

std::vector<GroundTruth> GroundTruths(const std::vector<Scenario>& scenarios,
                                      const std::vector<PreparedSample>& samples) {
  std::map<std::string, const Scenario*> by_id;
  for (const Scenario& s : scenarios) by_id[s.scenario_id] = &s;
  std::vector<GroundTruth> out;
  out.reserve(samples.size());
  for (const PreparedSample& p : samples) {
    out.push_back(GroundTruthFor(*by_id.at(p.scenario_id), p.target_id));
  }
  return out;
}

std::vector<Forecast> PredictAll(const Predictor& model,
                                 const std::vector<PreparedSample>& samples) {
  std::vector<Forecast> out;
  out.reserve(samples.size());
  for (const PreparedSample& s : samples) {
    out.push_back(model.Predict(s));
    out.back().valid = s.has_future();
  }
  return out;
}

double MeanAbsAlpha(const std::vector<Forecast>& forecasts) {
  double sum = 0.0;
  int n = 0;
  for (const Forecast& f : forecasts) {
    if (f.agent_alphas.empty()) continue;
    sum += std::abs(f.target_alpha) + std::abs(f.scene_alpha);
    n += 2;
  }
  return n > 0 ? sum / n : 0.0;
}

std::vector<QuestionGroup> AllGroups() {
  return {QuestionGroup::kSignal, QuestionGroup::kIntent, QuestionGroup::kType,
          QuestionGroup::kScene};
}

std::vector<AblationRow> ReasoningTypeGrid() {
  using G = QuestionGroup;
  std::vector<AblationRow> rows;
  rows.push_back({"(-)", false, {}, GainMode::kLearned, 0.0});
  rows.push_back({"(S,I)", true, {G::kSignal, G::kIntent}, GainMode::kLearned, 0.0});
  rows.push_back({"(I,T)", true, {G::kIntent, G::kType}, GainMode::kLearned, 0.0});
  rows.push_back({"(S,T)", true, {G::kSignal, G::kType}, GainMode::kLearned, 0.0});
  rows.push_back({"(Scene)", true, {G::kScene}, GainMode::kLearned, 0.0});
  rows.push_back({"(S,I,T,Scene)", true, AllGroups(), GainMode::kLearned, 0.0});
  return rows;
}

std::vector<AblationRow> GainGrid() {
  return {{"gain=added", true, AllGroups(), GainMode::kAdded, 0.0},
          {"gain=constant", true, AllGroups(), GainMode::kConstant, 0.0},
          {"gain=learned", true, AllGroups(), GainMode::kLearned, 0.0}};
}

std::vector<AblationRow> DelayGrid(const std::vector<double>& delays_s) {
  std::vector<AblationRow> rows;
  for (double d : delays_s) {
    char label[32];
    std::snprintf(label, sizeof(label), "delay=%gs", d);
    rows.push_back({label, true, AllGroups(), GainMode::kLearned, d});
  }
  return rows;
}

}  // namespace semcast
