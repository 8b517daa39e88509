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

// Fixed answer vocabularies for the per-agent and scene questions, and the
// multi-hot encodings built from chosen answers.

#ifndef SEMCAST_SEMANTIC_SCHEMA_H_
#define SEMCAST_SEMANTIC_SCHEMA_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "semcast/scene_model.h"

namespace semcast {

enum class SchemaKind { kVehicle, kPedestrian, kScene };

// Question families used by the reasoning-type ablation.
enum class QuestionGroup { kType, kSignal, kIntent, kOcclusion, kScene };

struct QuestionSpec {
  std::string question_id;
  SchemaKind applies_to;
  QuestionGroup group;
  std::vector<std::string> answers;
  std::string default_answer;

  int DefaultIndex() const;
  // Index of `token` in answers, or -1.
  int IndexOf(std::string_view token) const;
};

inline constexpr int kVehicleDim = 34;
inline constexpr int kPedestrianDim = 24;
inline constexpr int kAgentDim = kVehicleDim + kPedestrianDim;
inline constexpr int kSceneDim = 19;

const std::vector<QuestionSpec>& SchemaFor(SchemaKind kind);
SchemaKind SchemaKindFor(AgentCategory category);  // throws for OTHER
int SchemaDim(SchemaKind kind);
std::vector<std::string> DefaultAnswers(SchemaKind kind);

// Hash of every question id and answer list, in order.
const std::string& SchemaFingerprint();

// Unified agent vector (vehicle segment, then pedestrian segment). The
// segment of the other category stays zero. Unknown tokens or wrong answer
// counts throw std::invalid_argument.
Eigen::VectorXd EncodeAgent(AgentCategory category,
                            const std::vector<std::string>& answers);
Eigen::VectorXd EncodeScene(const std::vector<std::string>& answers);

// Per-segment argmax.
std::vector<std::string> DecodeAgent(AgentCategory category,
                                     const Eigen::VectorXd& encoding);
std::vector<std::string> DecodeScene(const Eigen::VectorXd& encoding);

// 0/1 mask over the unified agent vector keeping only `groups`.
Eigen::VectorXd AgentGroupMask(const std::vector<QuestionGroup>& groups);

struct AgentSemantics {
  std::string agent_id;
  AgentCategory category = AgentCategory::kVehicle;
  std::vector<std::string> answers;  // aligned with SchemaFor(category)
  Eigen::VectorXd encoding;
};

struct SceneSemantics {
  std::vector<std::string> answers;  // aligned with SchemaFor(kScene)
  Eigen::VectorXd encoding;
};

AgentSemantics MakeAgentSemantics(std::string agent_id, AgentCategory category,
                                  std::vector<std::string> answers);
SceneSemantics MakeSceneSemantics(std::vector<std::string> answers);

// One line of a feature file. agent_id is "SCENE" for scene records.
struct FeatureRecord {
  std::string scenario_id;
  std::string agent_id;
  int step = 0;
  AgentCategory category = AgentCategory::kOther;  // ignored for SCENE
  std::vector<std::string> answers;
  Eigen::VectorXd encoding;

  bool is_scene() const { return agent_id == kSceneId; }
  static constexpr std::string_view kSceneId = "SCENE";
};

std::string SerializeFeature(const FeatureRecord& record);
// Rejects records whose schema fingerprint differs from SchemaFingerprint().
FeatureRecord DeserializeFeature(std::string_view line, int line_number = 1);
void SaveFeatures(const std::vector<FeatureRecord>& records,
                  const std::filesystem::path& path);
std::vector<FeatureRecord> LoadFeatures(const std::filesystem::path& path);

}  // namespace semcast

#endif  // SEMCAST_SEMANTIC_SCHEMA_H_
