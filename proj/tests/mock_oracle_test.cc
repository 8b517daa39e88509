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

#include "semcast/mock_oracle.h"

#include <gtest/gtest.h>

#include "semcast/common.h"
#include "semcast/prompt_builder.h"
#include "semcast/response_parser.h"
#include "test_util.h"

namespace semcast {
namespace {

using testing::ToyScenarios;

std::vector<PromptPayload> AllPrompts(const Scenario& s) {
  std::vector<PromptPayload> out;
  for (AgentCategory c : {AgentCategory::kVehicle, AgentCategory::kPedestrian}) {
    if (auto p = BuildVsaPrompt(s, c)) out.push_back(*p);
  }
  out.push_back(BuildScPrompt(s));
  return out;
}

TEST(FaultProfileTest, ValidatesProbabilities) {
  FaultProfile f;
  EXPECT_NO_THROW(f.Validate());
  f.p_wrong_answer = 1.5;
  EXPECT_THROW(f.Validate(), ConfigError);
  f = {};
  f.p_missing_row = -0.1;
  EXPECT_THROW(f.Validate(), ConfigError);
}

TEST(MockGenerateTest, ZeroFaultOutputParsesToTruth) {
  for (const Scenario& s : ToyScenarios(20)) {
    for (const PromptPayload& p : AllPrompts(s)) {
      const MockResponse r = MockGenerate(s, p, FaultProfile{});
      EXPECT_TRUE(r.faults.events.empty());
      if (p.kind == PromptKind::kSc) {
        const ScParse parsed = ParseSc(r.text);
        EXPECT_EQ(parsed.report.status, ParseStatus::kFull);
        EXPECT_EQ(parsed.scene.answers, r.truth.at(0));
        EXPECT_EQ(parsed.scene.answers, OracleSceneAnswers(s));
      } else {
        const AgentCategory c = p.kind == PromptKind::kVsaVehicle ? AgentCategory::kVehicle
                                                                  : AgentCategory::kPedestrian;
        const VsaParse parsed = ParseVsa(r.text, c, p.agent_order);
        EXPECT_EQ(parsed.report.status, ParseStatus::kFull);
        for (size_t i = 0; i < p.agent_order.size(); ++i) {
          EXPECT_EQ(parsed.agents[i].answers, r.truth.at(i));
          EXPECT_EQ(parsed.agents[i].answers,
                    OracleAgentAnswers(s, p.agent_order[i], p.step));
        }
      }
    }
  }
}

TEST(MockGenerateTest, PureInInputs) {
  const Scenario s = ToyScenarios(1).front();
  FaultProfile f;
  f.p_wrong_answer = 0.3;
  f.p_out_of_vocab = 0.1;
  f.seed = 5;
  for (const PromptPayload& p : AllPrompts(s)) {
    EXPECT_EQ(MockGenerate(s, p, f).text, MockGenerate(s, p, f).text);
  }
  f.seed = 6;
  bool any_diff = false;
  FaultProfile g = f;
  g.seed = 5;
  for (const Scenario& sc : ToyScenarios(10)) {
    for (const PromptPayload& p : AllPrompts(sc)) {
      any_diff = any_diff || MockGenerate(sc, p, f).text != MockGenerate(sc, p, g).text;
    }
  }
  EXPECT_TRUE(any_diff);
}

TEST(OracleAnswersTest, IntentHiddenBeforeReveal) {
  for (const Scenario& s : ToyScenarios(30)) {
    for (const auto& [id, latent] : s.ground_truth_intent) {
      const AgentTrack* a = s.FindAgent(id);
      if (a->category != AgentCategory::kVehicle) continue;
      const auto& schema = SchemaFor(SchemaKind::kVehicle);
      if (latent.reveal_step > 1) {
        const auto before = OracleAgentAnswers(s, id, latent.reveal_step - 1);
        for (size_t q = 0; q < schema.size(); ++q) {
          if (schema[q].group == QuestionGroup::kIntent) EXPECT_EQ(before[q], "UNSURE");
        }
      }
      const auto after = OracleAgentAnswers(s, id, std::max(latent.reveal_step, 1));
      int yes = 0;
      for (size_t q = 0; q < schema.size(); ++q) {
        if (schema[q].group == QuestionGroup::kIntent) yes += after[q] == "YES";
      }
      EXPECT_EQ(yes, 1) << s.scenario_id << "/" << id;
    }
  }
}

TEST(MockGenerateTest, FaultRatesTrackProfile) {
  FaultProfile f;
  f.p_wrong_answer = 0.5;
  int cells = 0, wrong = 0;
  for (const Scenario& s : ToyScenarios(60)) {
    for (const PromptPayload& p : AllPrompts(s)) {
      const MockResponse r = MockGenerate(s, p, f);
      cells += r.faults.cells;
      wrong += r.faults.Count(FaultKind::kWrongAnswer);
    }
  }
  ASSERT_GT(cells, 500);
  EXPECT_NEAR(static_cast<double>(wrong) / cells, 0.5, 0.05);
}

TEST(MockGenerateTest, WrongAnswersStayInVocabularyAndDiffer) {
  FaultProfile f;
  f.p_wrong_answer = 1.0;
  const Scenario s = ToyScenarios(1).front();
  const PromptPayload p = BuildScPrompt(s);
  const MockResponse r = MockGenerate(s, p, f);
  const ScParse parsed = ParseSc(r.text);
  EXPECT_EQ(parsed.report.status, ParseStatus::kFull);
  for (size_t q = 0; q < 4; ++q) EXPECT_NE(parsed.scene.answers[q], r.truth[0][q]);
}

TEST(MockGenerateTest, StructuralFaultsDegradeToDefaults) {
  const Scenario s = ToyScenarios(1).front();
  const auto vsa = BuildVsaPrompt(s, AgentCategory::kVehicle);
  ASSERT_TRUE(vsa);
  FaultProfile malformed;
  malformed.p_malformed_table = 1.0;
  const MockResponse m = MockGenerate(s, *vsa, malformed);
  EXPECT_EQ(m.faults.Count(FaultKind::kMalformedTable), 1);
  EXPECT_EQ(ParseVsa(m.text, AgentCategory::kVehicle, vsa->agent_order).report.status,
            ParseStatus::kEmpty);
  FaultProfile missing;
  missing.p_missing_row = 1.0;
  const MockResponse r = MockGenerate(s, *vsa, missing);
  EXPECT_EQ(r.faults.Count(FaultKind::kMissingRow), static_cast<int>(vsa->agent_order.size()));
  EXPECT_EQ(ParseVsa(r.text, AgentCategory::kVehicle, vsa->agent_order).report.status,
            ParseStatus::kEmpty);
  FaultProfile oov;
  oov.p_out_of_vocab = 1.0;
  const ScParse sc = ParseSc(MockGenerate(s, BuildScPrompt(s), oov).text);
  EXPECT_EQ(sc.report.status, ParseStatus::kEmpty);
}

TEST(MockGenerateTest, NeedsLatentLabels) {
  Scenario s = ToyScenarios(1).front();
  s.ground_truth_intent.clear();
  const auto vsa = BuildVsaPrompt(s, AgentCategory::kVehicle);
  ASSERT_TRUE(vsa);
  EXPECT_THROW(MockGenerate(s, *vsa, FaultProfile{}), DataError);
}

}  // namespace
}  // namespace semcast
