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

#ifndef SEMCAST_PROMPT_BUILDER_H_
#define SEMCAST_PROMPT_BUILDER_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semcast/scene_model.h"

namespace semcast {

enum class PromptKind { kVsaVehicle, kVsaPedestrian, kSc };

std::string_view ToString(PromptKind kind);
PromptKind PromptKindFromString(std::string_view s);

inline constexpr std::string_view kTemplateVersion = "v1";

// One attachment bound to an <img> placeholder.
struct ImageSlot {
  std::string uri;
  std::string role;  // "agent_crop" or "scene"
  std::string agent_id;
  int step = 0;
  Camera camera = Camera::kFront;
  // Visual-prompt metadata, e.g. "red_bbox:a00,a02" on scene frames.
  std::string annotation;

  bool operator==(const ImageSlot&) const = default;
};

struct PromptPayload {
  std::string scenario_id;
  PromptKind kind = PromptKind::kSc;
  int step = 0;  // frame step the prompt was assembled at
  std::string text;
  std::vector<ImageSlot> image_slots;
  // Agents in answer-table row order (sorted by agent_id).
  std::vector<std::string> agent_order;
  std::string template_version{kTemplateVersion};

  bool operator==(const PromptPayload&) const = default;
};

// Agents are dropped from prompting when occluded or too far away.
struct VisibilityFilter {
  double max_occlusion = 0.7;
  double max_range_m = 60.0;

  bool Passes(const VisibleAgent& v) const {
    return v.occlusion_fraction <= max_occlusion && v.range <= max_range_m;
  }
};

const std::string& TemplateText(PromptKind kind);

// Number of "<img>" placeholders in `text`.
int CountImagePlaceholders(std::string_view text);

// Agents of `category` that pass `filter` in a front-facing frame at `step`,
// sorted by agent_id.
std::vector<std::string> VisibleAgents(const Scenario& scenario,
                                       AgentCategory category, int step,
                                       const VisibilityFilter& filter = {});

// Per-category agent prompt. Returns nullopt when no agent of the category is
// visible (the caller skips the MLLM call). `step` defaults to t0. Throws
// DataError when a scene camera frame is missing at `step`.
std::optional<PromptPayload> BuildVsaPrompt(const Scenario& scenario,
                                            AgentCategory category,
                                            std::optional<int> step = {},
                                            const VisibilityFilter& filter = {});

// Scene prompt bound to the front camera frame at `step` (default t0).
PromptPayload BuildScPrompt(const Scenario& scenario,
                            std::optional<int> step = {});

std::string SerializePayload(const PromptPayload& payload);

}  // namespace semcast

#endif  // SEMCAST_PROMPT_BUILDER_H_
