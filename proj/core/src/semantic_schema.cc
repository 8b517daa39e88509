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

#include "semcast/semantic_schema.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> kYesNo = {"YES", "NO", "UNSURE"};

QuestionSpec YesNo(std::string id, SchemaKind kind, QuestionGroup group) {
  return {std::move(id), kind, group, kYesNo, "UNSURE"};
}

std::vector<QuestionSpec> BuildVehicle() {
  constexpr SchemaKind k = SchemaKind::kVehicle;
  std::vector<QuestionSpec> q;
  q.push_back(YesNo("EmergencyVehicle", k, QuestionGroup::kType));
  q.push_back({"VehicleType", k, QuestionGroup::kType,
               {"SEDAN", "TRUCK", "BUS", "SUV", "OTHER"}, "OTHER"});
  q.push_back({"Signal", k, QuestionGroup::kSignal,
               {"TURN SIGNAL", "BRAKE LIGHTS", "HAZARD LIGHTS", "NONE", "UNSURE"},
               "UNSURE"});
  for (const char* id :
       {"KeepForward", "SlowDown", "Turn", "UTurn", "Parked", "Stop"}) {
    q.push_back(YesNo(id, k, QuestionGroup::kIntent));
  }
  q.push_back(YesNo("HeavyOcclusion", k, QuestionGroup::kOcclusion));
  return q;
}

std::vector<QuestionSpec> BuildPedestrian() {
  constexpr SchemaKind k = SchemaKind::kPedestrian;
  std::vector<QuestionSpec> q;
  q.push_back(YesNo("JayWalking", k, QuestionGroup::kIntent));
  q.push_back(YesNo("Micromobility", k, QuestionGroup::kType));
  for (const char* id : {"WalkSidewalk", "Cross", "Turn", "Stop", "Waiting"}) {
    q.push_back(YesNo(id, k, QuestionGroup::kIntent));
  }
  q.push_back(YesNo("LowVisibility", k, QuestionGroup::kOcclusion));
  return q;
}

std::vector<QuestionSpec> BuildScene() {
  constexpr SchemaKind k = SchemaKind::kScene;
  constexpr QuestionGroup g = QuestionGroup::kScene;
  return {
      {"Weather", k, g, {"SUNNY", "RAINY", "SNOWY", "FOGGY", "DARK", "UNSURE"}, "UNSURE"},
      {"TimeOfDay", k, g, {"DAY", "EVENING", "NIGHT", "UNSURE"}, "UNSURE"},
      {"RoadType", k, g,
       {"RESIDENTIAL", "HIGHWAY", "EXPRESS", "SERVICE", "OTHER", "UNSURE"}, "UNSURE"},
      YesNo("Intersection", k, g),
  };
}

// Offset of a category's segment within its encoding vector.
int SegmentOffset(SchemaKind kind) {
  return kind == SchemaKind::kPedestrian ? kVehicleDim : 0;
}

Eigen::VectorXd EncodeInto(SchemaKind kind, const std::vector<std::string>& answers,
                           int total_dim) {
  const auto& schema = SchemaFor(kind);
  if (answers.size() != schema.size()) {
    throw std::invalid_argument("expected " + std::to_string(schema.size()) +
                                " answers, got " + std::to_string(answers.size()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total_dim);
  int offset = SegmentOffset(kind);
  for (size_t q = 0; q < schema.size(); ++q) {
    const int idx = schema[q].IndexOf(answers[q]);
    if (idx < 0) {
      throw std::invalid_argument("token '" + answers[q] +
                                  "' is not in the vocabulary of " +
                                  schema[q].question_id);
    }
    out(offset + idx) = 1.0;
    offset += static_cast<int>(schema[q].answers.size());
  }
  return out;
}

std::vector<std::string> DecodeFrom(SchemaKind kind, const Eigen::VectorXd& v) {
  const auto& schema = SchemaFor(kind);
  std::vector<std::string> out;
  int offset = SegmentOffset(kind);
  for (const QuestionSpec& q : schema) {
    const int n = static_cast<int>(q.answers.size());
    Eigen::Index best = 0;
    v.segment(offset, n).maxCoeff(&best);
    out.push_back(q.answers[best]);
    offset += n;
  }
  return out;
}

}  // namespace

int QuestionSpec::DefaultIndex() const { return IndexOf(default_answer); }

int QuestionSpec::IndexOf(std::string_view token) const {
  for (size_t i = 0; i < answers.size(); ++i) {
    if (answers[i] == token) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<QuestionSpec>& SchemaFor(SchemaKind kind) {
  static const std::vector<QuestionSpec> vehicle = BuildVehicle();
  static const std::vector<QuestionSpec> pedestrian = BuildPedestrian();
  static const std::vector<QuestionSpec> scene = BuildScene();
  switch (kind) {
    case SchemaKind::kVehicle:
      return vehicle;
    case SchemaKind::kPedestrian:
      return pedestrian;
    case SchemaKind::kScene:
      break;
  }
  return scene;
}

SchemaKind SchemaKindFor(AgentCategory category) {
  switch (category) {
    case AgentCategory::kVehicle:
      return SchemaKind::kVehicle;
    case AgentCategory::kPedestrian:
      return SchemaKind::kPedestrian;
    case AgentCategory::kOther:
      break;
  }
  throw std::invalid_argument("no question schema for category OTHER");
}

int SchemaDim(SchemaKind kind) {
  int d = 0;
  for (const QuestionSpec& q : SchemaFor(kind)) d += static_cast<int>(q.answers.size());
  return d;
}

std::vector<std::string> DefaultAnswers(SchemaKind kind) {
  std::vector<std::string> out;
  for (const QuestionSpec& q : SchemaFor(kind)) out.push_back(q.default_answer);
  return out;
}

const std::string& SchemaFingerprint() {
  static const std::string fp = [] {
    std::string text;
    for (SchemaKind k : {SchemaKind::kVehicle, SchemaKind::kPedestrian, SchemaKind::kScene}) {
      for (const QuestionSpec& q : SchemaFor(k)) {
        text += q.question_id + ":";
        for (const std::string& a : q.answers) text += a + ",";
        text += "*" + q.default_answer + ";";
      }
      text += "\n";
    }
    return ShortFingerprint(text);
  }();
  return fp;
}

Eigen::VectorXd EncodeAgent(AgentCategory category,
                            const std::vector<std::string>& answers) {
  return EncodeInto(SchemaKindFor(category), answers, kAgentDim);
}

Eigen::VectorXd EncodeScene(const std::vector<std::string>& answers) {
  return EncodeInto(SchemaKind::kScene, answers, kSceneDim);
}

std::vector<std::string> DecodeAgent(AgentCategory category,
                                     const Eigen::VectorXd& encoding) {
  if (encoding.size() != kAgentDim) throw std::invalid_argument("bad agent encoding size");
  return DecodeFrom(SchemaKindFor(category), encoding);
}

std::vector<std::string> DecodeScene(const Eigen::VectorXd& encoding) {
  if (encoding.size() != kSceneDim) throw std::invalid_argument("bad scene encoding size");
  return DecodeFrom(SchemaKind::kScene, encoding);
}

Eigen::VectorXd AgentGroupMask(const std::vector<QuestionGroup>& groups) {
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(kAgentDim);
  int offset = 0;
  for (SchemaKind k : {SchemaKind::kVehicle, SchemaKind::kPedestrian}) {
    for (const QuestionSpec& q : SchemaFor(k)) {
      const int n = static_cast<int>(q.answers.size());
      if (std::find(groups.begin(), groups.end(), q.group) != groups.end()) {
        mask.segment(offset, n).setOnes();
      }
      offset += n;
    }
  }
  return mask;
}

AgentSemantics MakeAgentSemantics(std::string agent_id, AgentCategory category,
                                  std::vector<std::string> answers) {
  AgentSemantics s;
  s.agent_id = std::move(agent_id);
  s.category = category;
  s.encoding = EncodeAgent(category, answers);
  s.answers = std::move(answers);
  return s;
}

SceneSemantics MakeSceneSemantics(std::vector<std::string> answers) {
  SceneSemantics s;
  s.encoding = EncodeScene(answers);
  s.answers = std::move(answers);
  return s;
}

std::string SerializeFeature(const FeatureRecord& r) {
  const SchemaKind kind =
      r.is_scene() ? SchemaKind::kScene : SchemaKindFor(r.category);
  const auto& schema = SchemaFor(kind);
  Json answers = Json::object();
  for (size_t q = 0; q < schema.size() && q < r.answers.size(); ++q) {
    answers[schema[q].question_id] = r.answers[q];
  }
  Json j;
  j["scenario_id"] = r.scenario_id;
  j["agent_id"] = r.agent_id;
  j["step"] = r.step;
  if (!r.is_scene()) j["category"] = ToString(r.category);
  j["answers"] = std::move(answers);
  j["encoding"] = std::vector<double>(r.encoding.data(),
                                      r.encoding.data() + r.encoding.size());
  j["schema_fingerprint"] = SchemaFingerprint();
  return j.dump();
}

FeatureRecord DeserializeFeature(std::string_view line, int line_number) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_number, "<record>", e.what());
  }
  auto field = [&](const char* name) -> const Json& {
    if (!j.is_object() || !j.contains(name)) {
      throw ParseError(line_number, name, "missing field");
    }
    return j.at(name);
  };
  const Json& fp = field("schema_fingerprint");
  if (!fp.is_string() || fp.get<std::string>() != SchemaFingerprint()) {
    throw ParseError(line_number, "schema_fingerprint",
                     "schema fingerprint mismatch (file was written with a "
                     "different question schema)");
  }
  FeatureRecord r;
  try {
    r.scenario_id = field("scenario_id").get<std::string>();
    r.agent_id = field("agent_id").get<std::string>();
    r.step = field("step").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_number, "<header>", e.what());
  }
  SchemaKind kind = SchemaKind::kScene;
  if (!r.is_scene()) {
    try {
      r.category = AgentCategoryFromString(field("category").get<std::string>());
      kind = SchemaKindFor(r.category);
    } catch (const std::exception& e) {
      throw ParseError(line_number, "category", e.what());
    }
  }
  const Json& answers = field("answers");
  for (const QuestionSpec& q : SchemaFor(kind)) {
    if (!answers.contains(q.question_id) || !answers[q.question_id].is_string()) {
      throw ParseError(line_number, "answers." + q.question_id, "missing answer");
    }
    r.answers.push_back(answers[q.question_id].get<std::string>());
  }
  try {
    r.encoding = r.is_scene() ? EncodeScene(r.answers) : EncodeAgent(r.category, r.answers);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_number, "answers", e.what());
  }
  const Json& enc = field("encoding");
  if (!enc.is_array() || static_cast<Eigen::Index>(enc.size()) != r.encoding.size()) {
    throw ParseError(line_number, "encoding", "wrong dimension");
  }
  for (size_t i = 0; i < enc.size(); ++i) {
    if (!enc[i].is_number() || enc[i].get<double>() != r.encoding(i)) {
      throw ParseError(line_number, "encoding", "does not match answers");
    }
  }
  return r;
}

void SaveFeatures(const std::vector<FeatureRecord>& records,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const FeatureRecord& r : records) out << SerializeFeature(r) << '\n';
}

std::vector<FeatureRecord> LoadFeatures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<FeatureRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (Trim(line).empty()) continue;
    out.push_back(DeserializeFeature(line, n));
  }
  return out;
}

}  // namespace semcast
