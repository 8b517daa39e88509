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

#include "semcast/scene_model.h"

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "semcast/common.h"
#include "semcast/metrics.h"
#include "test_util.h"

namespace semcast {
namespace {

using testing::TempDir;
using testing::ToyScenarios;

TEST(NormalizeHeadingTest, WrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(NormalizeHeading(0.0), 0.0);
  EXPECT_DOUBLE_EQ(NormalizeHeading(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(NormalizeHeading(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(NormalizeHeading(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double h = NormalizeHeading(a);
    EXPECT_GT(h, -std::numbers::pi);
    EXPECT_LE(h, std::numbers::pi);
    EXPECT_NEAR(std::cos(h), std::cos(a), 1e-9);
    EXPECT_NEAR(std::sin(h), std::sin(a), 1e-9);
  }
}

TEST(EnumNamesTest, RoundTrip) {
  for (Intent i : {Intent::kKeepForward, Intent::kUTurn, Intent::kParked, Intent::kWaiting}) {
    EXPECT_EQ(IntentFromString(ToString(i)), i);
  }
  for (Camera c : {Camera::kFront, Camera::kFrontLeft, Camera::kFrontRight}) {
    EXPECT_EQ(CameraFromString(ToString(c)), c);
  }
  EXPECT_THROW(IntentFromString("FLY"), std::exception);
}

TEST(GenerateSyntheticTest, DeterministicInSeed) {
  const auto a = ToyScenarios(12, 3);
  const auto b = ToyScenarios(12, 3);
  const auto c = ToyScenarios(12, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GenerateSyntheticTest, ScenarioDependsOnlyOnIndex) {
  // A larger batch with the same seed shares nothing it should not: every
  // scenario is valid and ids are unique.
  const auto s = ToyScenarios(40, 11);
  std::set<std::string> ids;
  for (const Scenario& sc : s) {
    EXPECT_NO_THROW(ValidateScenario(sc));
    EXPECT_TRUE(ids.insert(sc.scenario_id).second);
  }
}

TEST(GenerateSyntheticTest, SatisfiesScenarioInvariants) {
  for (const Scenario& s : ToyScenarios(25)) {
    EXPECT_GE(s.history_len, 1);
    EXPECT_GT(s.horizon, s.history_len);
    for (const AgentTrack& a : s.agents) {
      ASSERT_EQ(static_cast<int>(a.states.size()), s.horizon);
      for (const AgentState& st : a.states) {
        EXPECT_GT(st.heading, -std::numbers::pi);
        EXPECT_LE(st.heading, std::numbers::pi);
        EXPECT_TRUE(std::isfinite(std::hypot(st.vx, st.vy)));
      }
    }
    for (const MapElement& m : s.map_elements) {
      ASSERT_GE(m.polyline.size(), 2u);
      for (size_t i = 1; i < m.polyline.size(); ++i) {
        EXPECT_GT((m.polyline[i] - m.polyline[i - 1]).norm(), 0.0);
      }
    }
    for (const SensorFrameRef& f : s.sensor_frames) {
      for (const VisibleAgent& v : f.visible_agents) {
        EXPECT_GE(v.occlusion_fraction, 0.0);
        EXPECT_LE(v.occlusion_fraction, 1.0);
        EXPECT_GT(v.range, 0.0);
      }
    }
    EXPECT_FALSE(s.Targets().empty());
  }
}

TEST(GenerateSyntheticTest, RejectsInvalidConfig) {
  GeneratorConfig g;
  g.num_scenarios = 0;
  EXPECT_THROW(GenerateSynthetic(g, 1), ConfigError);
  g = {};
  g.timing.future_len = 0;
  EXPECT_THROW(GenerateSynthetic(g, 1), ConfigError);
  g = {};
  g.timing.history_len = 0;
  EXPECT_THROW(GenerateSynthetic(g, 1), ConfigError);
}

// History alone under-determines the future: targets with different turn
// intents travel straight through the observed history, yet their futures
// separate.
TEST(GenerateSyntheticTest, IntentDeterminesFutureNotHistory) {
  GeneratorConfig g;
  g.num_scenarios = 120;
  g.turn_intent_mix = {{Intent::kKeepForward, 1.0}, {Intent::kTurnLeft, 1.0},
                       {Intent::kTurnRight, 1.0}};
  const auto scenarios = GenerateSynthetic(g, 5);
  std::map<Intent, std::vector<double>> heading_change, heading_t0;
  for (const Scenario& s : scenarios) {
    const std::string target = s.Targets().front();
    const Intent intent = s.ground_truth_intent.at(target).intent;
    const GroundTruth gt = GroundTruthFor(s, target);
    const int last = static_cast<int>(gt.mask.size()) - 1;
    heading_change[intent].push_back(NormalizeHeading(gt.heading(last) - gt.heading_t0));
    const AgentTrack* track = s.FindAgent(target);
    double start = gt.heading_t0;
    for (int k = 1; k <= s.history_len; ++k) {
      if (track->at(k).valid) {
        start = track->at(k).heading;
        break;
      }
    }
    heading_t0[intent].push_back(std::abs(NormalizeHeading(gt.heading_t0 - start)));
  }
  ASSERT_EQ(heading_change.size(), 3u);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  EXPECT_GT(mean(heading_change[Intent::kTurnLeft]), 1.0);
  EXPECT_LT(mean(heading_change[Intent::kTurnRight]), -1.0);
  EXPECT_LT(std::abs(mean(heading_change[Intent::kKeepForward])), 0.3);
  for (const auto& [intent, turns] : heading_t0) EXPECT_LT(mean(turns), 0.1);
}

TEST(GenerateSyntheticTest, SupportsEveryFamilyAndNuscTiming) {
  GeneratorConfig g;
  g.num_scenarios = 9;
  g.timing = TimingProfile::NuscStyle();
  g.family_mix = {{ScenarioFamily::kAmbiguousTurn, 1.0},
                  {ScenarioFamily::kJaywalkingPedestrian, 1.0},
                  {ScenarioFamily::kParkedVehicle, 1.0}};
  const auto s = GenerateSynthetic(g, 2);
  std::set<AgentCategory> categories;
  for (const Scenario& sc : s) {
    EXPECT_DOUBLE_EQ(sc.step_hz, 2.0);
    EXPECT_EQ(sc.future_len(), 12);
    for (const std::string& t : sc.Targets()) categories.insert(sc.FindAgent(t)->category);
  }
  EXPECT_TRUE(categories.count(AgentCategory::kVehicle));
  EXPECT_TRUE(categories.count(AgentCategory::kPedestrian));
}

TEST(GenerateSyntheticTest, TargetsAreVisibleThroughoutLongHistories) {
  GeneratorConfig g;
  g.num_scenarios = 20;
  g.timing = {10.0, 30, 80};
  g.occluded_fraction = 0.0;
  for (const Scenario& s : GenerateSynthetic(g, 9)) {
    const std::string target = s.Targets().front();
    for (int step : {1, 10, 20, 30}) {
      const SensorFrameRef* f = s.FindFrame(step, Camera::kFront);
      ASSERT_NE(f, nullptr);
      bool seen = false;
      for (const VisibleAgent& v : f->visible_agents) seen = seen || v.agent_id == target;
      EXPECT_TRUE(seen) << s.scenario_id << " step " << step;
    }
  }
}

TEST(ScenarioIoTest, RoundTripsThroughJsonLines) {
  const auto s = ToyScenarios(5);
  TempDir dir;
  SaveScenarios(s, dir / "s.jsonl");
  EXPECT_EQ(LoadScenarios(dir / "s.jsonl"), s);
  EXPECT_EQ(DeserializeScenario(SerializeScenario(s[0])), s[0]);
}

TEST(ScenarioIoTest, MalformedLineReportsLineNumber) {
  TempDir dir;
  const auto s = ToyScenarios(2);
  {
    std::ofstream f(dir / "bad.jsonl");
    f << SerializeScenario(s[0]) << "\n{\"scenario_id\": 3}\n";
  }
  try {
    LoadScenarios(dir / "bad.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ValidateScenarioTest, RejectsBrokenInvariants) {
  Scenario s = ToyScenarios(1).front();
  Scenario bad = s;
  bad.history_len = 0;
  EXPECT_THROW(ValidateScenario(bad), DataError);
  bad = s;
  bad.horizon = bad.history_len;
  EXPECT_THROW(ValidateScenario(bad), DataError);
  bad = s;
  bad.map_elements.front().polyline.resize(1);
  EXPECT_THROW(ValidateScenario(bad), DataError);
  bad = s;
  bad.sensor_frames.front().visible_agents.push_back({"x", 1.5, 3.0});
  EXPECT_THROW(ValidateScenario(bad), DataError);
  bad = s;
  bad.traffic_lights.push_back(bad.traffic_lights.front());
  EXPECT_THROW(ValidateScenario(bad), DataError);
}

TEST(SplitFingerprintTest, DependsOnIdsAndOrder) {
  auto s = ToyScenarios(4);
  const std::string f = SplitFingerprint(s);
  EXPECT_EQ(f, SplitFingerprint(ToyScenarios(4)));
  std::swap(s[0], s[1]);
  EXPECT_NE(f, SplitFingerprint(s));
}

}  // namespace
}  // namespace semcast
