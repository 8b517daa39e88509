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

#include <algorithm>

#include "semcast/common.h"
#include "semcast/response_parser.h"
#include "semcast/semantic_schema.h"

namespace semcast {
namespace {

constexpr const char* kOutOfVocabTokens[] = {"MAYBE", "PROBABLY", "N/A", "LIKELY YES",
                                             "UNKNOWN"};

std::string YesNo(bool b) { return b ? "YES" : "NO"; }

std::vector<std::string> VehicleAnswers(const AgentLatent* latent, bool revealed,
                                        double occlusion) {
  // EmergencyVehicle, VehicleType, Signal, KeepForward, SlowDown, Turn, UTurn,
  // Parked, Stop, HeavyOcclusion.
  std::vector<std::string> a(10, "UNSURE");
  a[0] = latent != nullptr ? YesNo(latent->emergency) : "NO";
  a[1] = latent != nullptr ? latent->vehicle_type : "OTHER";
  a[9] = YesNo(occlusion >= 0.5);
  if (latent == nullptr || !revealed) return a;
  const Intent i = latent->intent;
  switch (i) {
    case Intent::kTurnLeft:
    case Intent::kTurnRight:
    case Intent::kUTurn:
      a[2] = "TURN SIGNAL";
      break;
    case Intent::kSlowDown:
    case Intent::kStop:
      a[2] = "BRAKE LIGHTS";
      break;
    case Intent::kParked:
      a[2] = "HAZARD LIGHTS";
      break;
    default:
      a[2] = "NONE";
      break;
  }
  a[3] = YesNo(i == Intent::kKeepForward);
  a[4] = YesNo(i == Intent::kSlowDown);
  a[5] = YesNo(i == Intent::kTurnLeft || i == Intent::kTurnRight);
  a[6] = YesNo(i == Intent::kUTurn);
  a[7] = YesNo(i == Intent::kParked);
  a[8] = YesNo(i == Intent::kStop);
  return a;
}

std::vector<std::string> PedestrianAnswers(const AgentLatent* latent, bool revealed,
                                           bool low_visibility) {
  // JayWalking, Micromobility, WalkSidewalk, Cross, Turn, Stop, Waiting,
  // LowVisibility.
  std::vector<std::string> a(8, "UNSURE");
  a[1] = latent != nullptr ? YesNo(latent->micromobility) : "NO";
  a[7] = YesNo(low_visibility);
  if (latent == nullptr || !revealed) return a;
  const Intent i = latent->intent;
  a[0] = YesNo(i == Intent::kJaywalk);
  a[2] = YesNo(i == Intent::kWalkSidewalk);
  a[3] = YesNo(i == Intent::kCross || i == Intent::kJaywalk);
  a[4] = "NO";
  a[5] = YesNo(i == Intent::kWaiting);
  a[6] = YesNo(i == Intent::kWaiting);
  return a;
}

double MaxOcclusion(const Scenario& s, const std::string& agent_id, int step) {
  double occ = 0.0;
  for (const SensorFrameRef& f : s.sensor_frames) {
    if (f.step != step) continue;
    for (const VisibleAgent& v : f.visible_agents) {
      if (v.agent_id == agent_id) occ = std::max(occ, v.occlusion_fraction);
    }
  }
  return occ;
}

// Applies per-cell faults to one answer row.
void CorruptCells(std::vector<std::string>& row, const std::vector<QuestionSpec>& schema,
                  const std::string& agent_id, const FaultProfile& p, Rng& rng,
                  FaultLog& log) {
  for (size_t q = 0; q < row.size(); ++q) {
    ++log.cells;
    // Both draws happen for every cell so one fault rate does not shift the
    // random stream of the other.
    const bool wrong = rng.Bernoulli(p.p_wrong_answer);
    const int wrong_pick = rng.UniformInt(0, static_cast<int>(schema[q].answers.size()) - 2);
    const bool oov = rng.Bernoulli(p.p_out_of_vocab);
    const int oov_pick = rng.UniformInt(0, std::size(kOutOfVocabTokens) - 1);
    const std::string original = row[q];
    if (oov) {
      row[q] = kOutOfVocabTokens[oov_pick];
      log.events.push_back({FaultKind::kOutOfVocab, agent_id, schema[q].question_id,
                            original, row[q]});
    } else if (wrong) {
      std::vector<std::string> others;
      for (const std::string& a : schema[q].answers) {
        if (a != original) others.push_back(a);
      }
      row[q] = others[wrong_pick % others.size()];
      log.events.push_back({FaultKind::kWrongAnswer, agent_id, schema[q].question_id,
                            original, row[q]});
    }
  }
}

std::string StripPipes(std::string text) {
  std::replace(text.begin(), text.end(), '|', ' ');
  return text;
}

}  // namespace

void FaultProfile::Validate() const {
  for (double p : {p_wrong_answer, p_malformed_table, p_missing_row, p_out_of_vocab}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("fault probabilities must be in [0, 1]");
    }
  }
}

std::string_view ToString(FaultKind k) {
  switch (k) {
    case FaultKind::kWrongAnswer:
      return "WRONG_ANSWER";
    case FaultKind::kOutOfVocab:
      return "OUT_OF_VOCAB";
    case FaultKind::kMissingRow:
      return "MISSING_ROW";
    case FaultKind::kMalformedTable:
      break;
  }
  return "MALFORMED_TABLE";
}

int FaultLog::Count(FaultKind kind) const {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [&](const FaultEvent& e) { return e.kind == kind; }));
}

std::vector<std::string> OracleAgentAnswers(const Scenario& scenario,
                                            const std::string& agent_id, int step) {
  const AgentTrack* track = scenario.FindAgent(agent_id);
  if (track == nullptr) throw DataError("unknown agent '" + agent_id + "'");
  const auto it = scenario.ground_truth_intent.find(agent_id);
  const AgentLatent* latent = it == scenario.ground_truth_intent.end() ? nullptr : &it->second;
  const bool revealed = latent != nullptr && step >= latent->reveal_step;
  if (track->category == AgentCategory::kVehicle) {
    return VehicleAnswers(latent, revealed, MaxOcclusion(scenario, agent_id, step));
  }
  if (track->category == AgentCategory::kPedestrian) {
    bool low_vis = false;
    if (scenario.ground_truth_scene) {
      low_vis = scenario.ground_truth_scene->weather != "SUNNY" ||
                scenario.ground_truth_scene->time_of_day == "NIGHT";
    }
    return PedestrianAnswers(latent, revealed, low_vis);
  }
  throw DataError("agent '" + agent_id + "' has no question schema");
}

std::vector<std::string> OracleSceneAnswers(const Scenario& scenario) {
  if (!scenario.ground_truth_scene) return DefaultAnswers(SchemaKind::kScene);
  const SceneLatent& s = *scenario.ground_truth_scene;
  return {s.weather, s.time_of_day, s.road_type, s.intersection};
}

MockResponse MockGenerate(const Scenario& scenario, const PromptPayload& payload,
                          const FaultProfile& profile) {
  profile.Validate();
  if (scenario.ground_truth_intent.empty()) {
    throw DataError("scenario '" + scenario.scenario_id +
                    "' carries no latent labels for the mock oracle");
  }
  Rng rng(HashToSeed(payload.scenario_id + '\0' + std::string(ToString(payload.kind)) +
                         '\0' + payload.text + '\0' + std::to_string(payload.step),
                     profile.seed));
  MockResponse out;

  if (payload.kind == PromptKind::kSc) {
    const std::vector<QuestionSpec>& schema = SchemaFor(SchemaKind::kScene);
    std::vector<std::string> answers = OracleSceneAnswers(scenario);
    out.truth.push_back(answers);
    out.faults.rows = 1;
    CorruptCells(answers, schema, std::string(FeatureRecord::kSceneId), profile, rng,
                 out.faults);
    const bool malformed = rng.Bernoulli(profile.p_malformed_table);
    std::string final_line = FormatScFinalAnswer(answers);
    if (malformed) {
      // Tags lost: the answer line no longer carries bracketed tokens.
      final_line.erase(std::remove_if(final_line.begin(), final_line.end(),
                                      [](char c) { return c == '<' || c == '>'; }),
                       final_line.end());
      out.faults.events.push_back(
          {FaultKind::kMalformedTable, std::string(FeatureRecord::kSceneId), "", "", ""});
    }
    out.text = "Logic: The weather looks " + ToUpper(out.truth[0][0]) +
               " and the road appears to be " + out.truth[0][2] +
               ". I keep watching the actors near the intersection for the next 3 "
               "seconds.\n\n" +
               final_line;
    return out;
  }

  const AgentCategory category = payload.kind == PromptKind::kVsaVehicle
                                     ? AgentCategory::kVehicle
                                     : AgentCategory::kPedestrian;
  const std::vector<QuestionSpec>& schema = SchemaFor(SchemaKindFor(category));
  std::vector<std::vector<std::string>> rows;
  std::string explanation = "**Explanation of certain predictions:**\n\n";
  for (size_t j = 0; j < payload.agent_order.size(); ++j) {
    const std::string& id = payload.agent_order[j];
    std::vector<std::string> answers = OracleAgentAnswers(scenario, id, payload.step);
    out.truth.push_back(answers);
    ++out.faults.rows;
    const std::string what = category == AgentCategory::kVehicle
                                 ? "a " + answers[1] + " vehicle"
                                 : (answers[1] == "YES" ? "a rider on a scooter"
                                                        : "a pedestrian on foot");
    explanation += "* **Row " + std::to_string(j + 1) + ":** From the crops and the " +
                   "scene frames this is " + what + ".\n";
    CorruptCells(answers, schema, id, profile, rng, out.faults);
    if (rng.Bernoulli(profile.p_missing_row)) {
      out.faults.events.push_back({FaultKind::kMissingRow, id, "", "", ""});
      continue;
    }
    rows.push_back(std::move(answers));
  }
  std::string block = FormatVsaAnswerBlock(category, rows);
  if (rng.Bernoulli(profile.p_malformed_table)) {
    block = StripPipes(std::move(block));
    out.faults.events.push_back({FaultKind::kMalformedTable, "", "", "", ""});
  }
  out.text = explanation + "\n" + block;
  return out;
}

}  // namespace semcast
