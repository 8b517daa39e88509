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

#include "semcast/response_parser.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "semcast/common.h"

namespace semcast {
namespace {

constexpr std::string_view kOpen = "<ANSWER>";
constexpr std::string_view kClose = "</ANSWER>";
constexpr std::string_view kCloseAlt = "<\\ANSWER>";

bool MatchAt(std::string_view text, size_t pos, std::string_view tag) {
  if (pos + tag.size() > text.size()) return false;
  for (size_t i = 0; i < tag.size(); ++i) {
    const char c = text[pos + i];
    const char u = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c;
    if (u != tag[i]) return false;
  }
  return true;
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

ParseStatus StatusFor(const ParseReport& r) {
  const int defaulted = r.defaulted_count();
  if (defaulted == 0) return ParseStatus::kFull;
  if (defaulted == static_cast<int>(r.fields.size())) return ParseStatus::kEmpty;
  return ParseStatus::kPartial;
}

bool AnyCellInVocabulary(const std::vector<std::string>& row,
                         const std::vector<QuestionSpec>& schema) {
  for (size_t i = 0; i < row.size() && i < schema.size(); ++i) {
    if (schema[i].IndexOf(ToUpper(Trim(row[i]))) >= 0) return true;
  }
  return false;
}

}  // namespace

std::string_view ToString(ParseStatus s) {
  switch (s) {
    case ParseStatus::kFull:
      return "FULL";
    case ParseStatus::kPartial:
      return "PARTIAL";
    case ParseStatus::kEmpty:
      break;
  }
  return "EMPTY";
}

std::string_view ToString(FieldSource s) {
  return s == FieldSource::kParsed ? "PARSED" : "DEFAULTED";
}

int ParseReport::defaulted_count() const {
  return static_cast<int>(std::count_if(fields.begin(), fields.end(), [](const auto& f) {
    return f.source == FieldSource::kDefaulted;
  }));
}

std::optional<std::string> ExtractAnswerBlock(std::string_view raw) {
  std::optional<std::string> last;
  std::optional<size_t> open;  // offset just past the current opener
  size_t pos = 0;
  while (pos < raw.size()) {
    if (raw[pos] != '<') {
      ++pos;
      continue;
    }
    if (MatchAt(raw, pos, kOpen)) {
      if (open) {
        last = std::string(raw.substr(*open, pos - *open));
        open.reset();
      } else {
        open = pos + kOpen.size();
      }
      pos += kOpen.size();
    } else if (MatchAt(raw, pos, kClose) || MatchAt(raw, pos, kCloseAlt)) {
      if (open) {
        last = std::string(raw.substr(*open, pos - *open));
        open.reset();
      }
      pos += kClose.size();
    } else {
      ++pos;
    }
  }
  return last;
}

std::vector<std::vector<std::string>> SplitTableRows(std::string_view block) {
  std::vector<std::vector<std::string>> rows;
  for (std::string_view line : Lines(block)) {
    const std::string trimmed = Trim(line);
    if (trimmed.find('|') == std::string::npos) continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      const size_t bar = trimmed.find('|', start);
      if (bar == std::string::npos) {
        cells.push_back(trimmed.substr(start));
        break;
      }
      cells.push_back(trimmed.substr(start, bar - start));
      start = bar + 1;
    }
    const bool leading = trimmed.front() == '|';
    if (leading) cells.erase(cells.begin());
    // The segment after the last pipe is empty for a closed row; on an
    // opened row it is a cut-off cell either way.
    if (leading || trimmed.back() == '|') cells.pop_back();
    if (!cells.empty()) rows.push_back(std::move(cells));
  }
  return rows;
}

bool IsSeparatorCell(std::string_view cell) {
  const std::string t = Trim(cell);
  size_t b = 0, e = t.size();
  if (b < e && t[b] == ':') ++b;
  if (e > b && t[e - 1] == ':') --e;
  if (b >= e) return false;
  return std::all_of(t.begin() + b, t.begin() + e, [](char c) { return c == '-'; });
}

VsaParse ParseVsa(std::string_view raw, AgentCategory category,
                  const std::vector<std::string>& agent_order) {
  if (agent_order.empty()) throw std::invalid_argument("agent_order must not be empty");
  const SchemaKind kind = SchemaKindFor(category);
  const std::vector<QuestionSpec>& schema = SchemaFor(kind);

  VsaParse out;
  std::vector<std::vector<std::string>> rows;
  const std::optional<std::string> block = ExtractAnswerBlock(raw);
  if (!block) {
    out.report.diagnostics.push_back("no complete answer block");
  } else {
    rows = SplitTableRows(*block);
    const auto sep = std::find_if(rows.begin(), rows.end(), [](const auto& row) {
      return std::all_of(row.begin(), row.end(),
                         [](const std::string& c) { return IsSeparatorCell(c); });
    });
    if (sep != rows.end()) {
      rows.erase(rows.begin(), sep + 1);
    } else if (!rows.empty() && !AnyCellInVocabulary(rows.front(), schema)) {
      rows.erase(rows.begin());
    }
    if (rows.empty()) out.report.diagnostics.push_back("answer block has no data rows");
    if (rows.size() > agent_order.size()) {
      out.report.diagnostics.push_back(std::to_string(rows.size() - agent_order.size()) +
                                       " surplus row(s) ignored");
    }
  }

  for (size_t j = 0; j < agent_order.size(); ++j) {
    const std::string& agent_id = agent_order[j];
    std::vector<std::string> answers;
    answers.reserve(schema.size());
    const std::vector<std::string>* row = j < rows.size() ? &rows[j] : nullptr;
    if (row == nullptr && block) {
      out.report.diagnostics.push_back("missing row for " + agent_id);
    }
    for (size_t q = 0; q < schema.size(); ++q) {
      FieldOutcome f{agent_id, schema[q].question_id, FieldSource::kDefaulted};
      std::string value = schema[q].default_answer;
      if (row != nullptr && q < row->size()) {
        const std::string token = ToUpper(Trim((*row)[q]));
        if (schema[q].IndexOf(token) >= 0) {
          value = token;
          f.source = FieldSource::kParsed;
        } else {
          out.report.diagnostics.push_back(agent_id + "/" + schema[q].question_id +
                                           ": unrecognized '" + token + "'");
        }
      }
      answers.push_back(std::move(value));
      out.report.fields.push_back(std::move(f));
    }
    out.agents.push_back(MakeAgentSemantics(agent_id, category, std::move(answers)));
  }
  out.report.status = StatusFor(out.report);
  return out;
}

ScParse ParseSc(std::string_view raw) {
  const std::vector<QuestionSpec>& schema = SchemaFor(SchemaKind::kScene);
  constexpr std::string_view kPrefix = "FINAL ANSWER:";
  std::optional<std::string> line;
  for (std::string_view l : Lines(raw)) {
    const std::string t = Trim(l);
    if (t.size() >= kPrefix.size() && ToUpper(t.substr(0, kPrefix.size())) == kPrefix) {
      line = t.substr(kPrefix.size());
    }
  }
  std::vector<std::string> tokens;
  if (line) {
    size_t pos = 0;
    while (true) {
      const size_t lt = line->find('<', pos);
      if (lt == std::string::npos) break;
      const size_t gt = line->find_first_of("<>", lt + 1);
      if (gt == std::string::npos) break;
      if ((*line)[gt] == '<') {  // stray '<'; restart from the next one
        pos = gt;
        continue;
      }
      tokens.push_back(line->substr(lt + 1, gt - lt - 1));
      pos = gt + 1;
    }
  }

  ScParse out;
  if (!line) out.report.diagnostics.push_back("no final-answer line");
  std::vector<std::string> answers;
  for (size_t q = 0; q < schema.size(); ++q) {
    FieldOutcome f{std::string(FeatureRecord::kSceneId), schema[q].question_id,
                   FieldSource::kDefaulted};
    std::string value = schema[q].default_answer;
    if (q < tokens.size()) {
      const std::string token = ToUpper(Trim(tokens[q]));
      if (schema[q].IndexOf(token) >= 0) {
        value = token;
        f.source = FieldSource::kParsed;
      } else {
        out.report.diagnostics.push_back(schema[q].question_id + ": unrecognized '" +
                                         token + "'");
      }
    }
    answers.push_back(std::move(value));
    out.report.fields.push_back(std::move(f));
  }
  out.scene = MakeSceneSemantics(std::move(answers));
  out.report.status = StatusFor(out.report);
  return out;
}

std::string FormatVsaAnswerBlock(AgentCategory category,
                                 const std::vector<std::vector<std::string>>& rows) {
  const std::vector<QuestionSpec>& schema = SchemaFor(SchemaKindFor(category));
  std::string header = "|", sep = "|";
  for (const QuestionSpec& q : schema) {
    header += " " + q.question_id + " |";
    sep += "---|";
  }
  std::string out = std::string(kOpen) + "\n" + header + "\n" + sep + "\n";
  for (const auto& row : rows) {
    out += "|";
    for (const std::string& cell : row) out += " " + cell + " |";
    out += "\n";
  }
  out += kClose;
  return out;
}

std::string FormatScFinalAnswer(const std::vector<std::string>& answers) {
  std::string out = "Final answer:";
  for (const std::string& a : answers) out += " <" + a + ">";
  return out;
}

void SaveParseReportCsv(const std::vector<ParseReportRow>& rows,
                        const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "scenario_id,prompt_kind,status,defaulted_count\n";
  for (const ParseReportRow& r : rows) {
    os << r.scenario_id << ',' << r.prompt_kind << ',' << ToString(r.status) << ','
       << r.defaulted_count << '\n';
  }
  if (!os) throw DataError("write failed for " + path.string());
}

}  // namespace semcast
