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

// Turns raw model generations into schema answers. Anything that cannot be
// read falls back to the question's default answer; the parser never throws
// on content.

#ifndef SEMCAST_RESPONSE_PARSER_H_
#define SEMCAST_RESPONSE_PARSER_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semcast/scene_model.h"
#include "semcast/semantic_schema.h"

namespace semcast {

enum class ParseStatus { kFull, kPartial, kEmpty };
enum class FieldSource { kParsed, kDefaulted };

std::string_view ToString(ParseStatus s);
std::string_view ToString(FieldSource s);

struct FieldOutcome {
  std::string agent_id;  // "SCENE" for scene answers
  std::string question_id;
  FieldSource source = FieldSource::kDefaulted;
};

struct ParseReport {
  ParseStatus status = ParseStatus::kEmpty;
  std::vector<FieldOutcome> fields;  // agent-major, schema order
  std::vector<std::string> diagnostics;

  int defaulted_count() const;
};

struct VsaParse {
  std::vector<AgentSemantics> agents;  // aligned with agent_order
  ParseReport report;
};

struct ScParse {
  SceneSemantics scene;
  ParseReport report;
};

// Contents of the last complete answer block. The opener is <ANSWER>; the
// closer is </ANSWER>, <\ANSWER>, or a second <ANSWER>. An unclosed block
// does not count.
std::optional<std::string> ExtractAnswerBlock(std::string_view raw);

// Cells of every pipe-delimited row in `block`, header and separator rows
// included. On rows that open with a pipe, a trailing segment without a
// closing pipe is discarded as truncated.
std::vector<std::vector<std::string>> SplitTableRows(std::string_view block);

// True for markdown separator cells such as "---" or ":-:".
bool IsSeparatorCell(std::string_view cell);

// Throws std::invalid_argument for an empty agent_order or a category with no
// schema.
VsaParse ParseVsa(std::string_view raw, AgentCategory category,
                  const std::vector<std::string>& agent_order);

ScParse ParseSc(std::string_view raw);

// Canonical renderings of parsed answers; parsing them reproduces the input.
std::string FormatVsaAnswerBlock(AgentCategory category,
                                 const std::vector<std::vector<std::string>>& rows);
std::string FormatScFinalAnswer(const std::vector<std::string>& answers);

struct ParseReportRow {
  std::string scenario_id;
  std::string prompt_kind;
  ParseStatus status = ParseStatus::kEmpty;
  int defaulted_count = 0;
};

void SaveParseReportCsv(const std::vector<ParseReportRow>& rows,
                        const std::filesystem::path& path);

}  // namespace semcast

#endif  // SEMCAST_RESPONSE_PARSER_H_
