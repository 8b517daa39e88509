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

// Deterministic stand-in for a multimodal model. It answers from the
// scenario's latent labels in the same text layout a real model produces, and
// can corrupt its own output to exercise the parser and the gates.

#ifndef SEMCAST_MOCK_ORACLE_H_
#define SEMCAST_MOCK_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "semcast/prompt_builder.h"
#include "semcast/scene_model.h"

namespace semcast {

struct FaultProfile {
  double p_wrong_answer = 0.0;     // per cell: a different in-vocabulary token
  double p_malformed_table = 0.0;  // per response: table pipes removed
  double p_missing_row = 0.0;      // per row: row omitted
  double p_out_of_vocab = 0.0;     // per cell: token outside the vocabulary
  uint64_t seed = 0;

  // Throws ConfigError for probabilities outside [0, 1].
  void Validate() const;
  bool operator==(const FaultProfile&) const = default;
};

enum class FaultKind { kWrongAnswer, kOutOfVocab, kMissingRow, kMalformedTable };

std::string_view ToString(FaultKind k);

struct FaultEvent {
  FaultKind kind;
  std::string agent_id;     // "SCENE" for scene prompts; empty for table faults
  std::string question_id;  // empty for row and table faults
  std::string original;
  std::string injected;
};

struct FaultLog {
  int cells = 0;  // answer cells emitted before row/table faults
  int rows = 0;
  std::vector<FaultEvent> events;

  int Count(FaultKind kind) const;
};

struct MockResponse {
  std::string text;
  FaultLog faults;
  // Clean answers per agent_order row (or the single scene row).
  std::vector<std::vector<std::string>> truth;
};

// Answers a well-informed observer would give at `step`. Intent-bearing
// answers stay UNSURE until the agent's reveal step.
std::vector<std::string> OracleAgentAnswers(const Scenario& scenario,
                                            const std::string& agent_id, int step);
std::vector<std::string> OracleSceneAnswers(const Scenario& scenario);

// Pure in (scenario, payload, profile). Throws DataError when the scenario
// has no latent labels.
MockResponse MockGenerate(const Scenario& scenario, const PromptPayload& payload,
                          const FaultProfile& profile);

}  // namespace semcast

#endif  // SEMCAST_MOCK_ORACLE_H_
