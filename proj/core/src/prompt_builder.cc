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

#include "semcast/prompt_builder.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace internal {
extern const char* const kVsaVehicleTemplateV1;
extern const char* const kVsaPedestrianTemplateV1;
extern const char* const kScSceneTemplateV1;
}  // namespace internal

namespace {

constexpr std::string_view kCropsPlaceholder = "{{AGENT_CROPS}}";
constexpr Camera kSceneCameras[] = {Camera::kFront, Camera::kFrontLeft,
                                    Camera::kFrontRight};

int ClampStep(double step) {
  return std::max(1, static_cast<int>(std::lround(step)));
}

// First front-facing frame at `step` that sees `agent_id`, else the front frame.
const SensorFrameRef* CropSource(const Scenario& s, const std::string& agent_id,
                                 int step) {
  for (Camera cam : kSceneCameras) {
    const SensorFrameRef* f = s.FindFrame(step, cam);
    if (f == nullptr) continue;
    for (const VisibleAgent& v : f->visible_agents) {
      if (v.agent_id == agent_id) return f;
    }
  }
  return s.FindFrame(step, Camera::kFront);
}

}  // namespace

std::string_view ToString(PromptKind kind) {
  switch (kind) {
    case PromptKind::kVsaVehicle:
      return "VSA_VEHICLE";
    case PromptKind::kVsaPedestrian:
      return "VSA_PEDESTRIAN";
    case PromptKind::kSc:
      break;
  }
  return "SC";
}

PromptKind PromptKindFromString(std::string_view s) {
  if (s == "VSA_VEHICLE") return PromptKind::kVsaVehicle;
  if (s == "VSA_PEDESTRIAN") return PromptKind::kVsaPedestrian;
  if (s == "SC") return PromptKind::kSc;
  throw DataError("unknown prompt kind '" + std::string(s) + "'");
}

const std::string& TemplateText(PromptKind kind) {
  static const std::string vehicle = internal::kVsaVehicleTemplateV1;
  static const std::string pedestrian = internal::kVsaPedestrianTemplateV1;
  static const std::string scene = internal::kScSceneTemplateV1;
  switch (kind) {
    case PromptKind::kVsaVehicle:
      return vehicle;
    case PromptKind::kVsaPedestrian:
      return pedestrian;
    case PromptKind::kSc:
      break;
  }
  return scene;
}

int CountImagePlaceholders(std::string_view text) {
  int n = 0;
  for (size_t pos = text.find("<img>"); pos != std::string_view::npos;
       pos = text.find("<img>", pos + 5)) {
    ++n;
  }
  return n;
}

std::vector<std::string> VisibleAgents(const Scenario& scenario,
                                       AgentCategory category, int step,
                                       const VisibilityFilter& filter) {
  std::vector<std::string> out;
  for (Camera cam : kSceneCameras) {
    const SensorFrameRef* f = scenario.FindFrame(step, cam);
    if (f == nullptr) continue;
    for (const VisibleAgent& v : f->visible_agents) {
      const AgentTrack* a = scenario.FindAgent(v.agent_id);
      if (a == nullptr || a->category != category || !filter.Passes(v)) continue;
      if (step > static_cast<int>(a->states.size()) || !a->at(step).valid) continue;
      out.push_back(v.agent_id);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<PromptPayload> BuildVsaPrompt(const Scenario& scenario,
                                            AgentCategory category,
                                            std::optional<int> step,
                                            const VisibilityFilter& filter) {
  PromptKind kind;
  if (category == AgentCategory::kVehicle) {
    kind = PromptKind::kVsaVehicle;
  } else if (category == AgentCategory::kPedestrian) {
    kind = PromptKind::kVsaPedestrian;
  } else {
    throw std::invalid_argument("agent prompts exist for vehicles and pedestrians only");
  }
  const int at = step.value_or(scenario.history_len);
  if (at < 1 || at > scenario.history_len) {
    throw DataError("scenario '" + scenario.scenario_id + "': no frames at step " +
                    std::to_string(at));
  }
  for (Camera cam : kSceneCameras) {
    if (scenario.FindFrame(at, cam) == nullptr) {
      throw DataError("scenario '" + scenario.scenario_id + "': missing " +
                      std::string(ToString(cam)) + " frame at step " +
                      std::to_string(at));
    }
  }
  PromptPayload p;
  p.scenario_id = scenario.scenario_id;
  p.kind = kind;
  p.step = at;
  p.agent_order = VisibleAgents(scenario, category, at, filter);
  if (p.agent_order.empty()) return std::nullopt;

  // Temporal crops at t, t - 0.5 s and t - 1 s.
  const double hz = scenario.step_hz;
  const int crop_steps[3] = {at, ClampStep(at - 0.5 * hz), ClampStep(at - 1.0 * hz)};
  std::string crops;
  for (const std::string& id : p.agent_order) {
    for (int cs : crop_steps) {
      const SensorFrameRef* f = CropSource(scenario, id, cs);
      if (f == nullptr) {
        throw DataError("scenario '" + scenario.scenario_id +
                        "': no frame for crop at step " + std::to_string(cs));
      }
      p.image_slots.push_back({f->uri + "#agent=" + id, "agent_crop", id, cs,
                               f->camera, "crop"});
      crops += crops.empty() ? "<img>" : " <img>";
    }
  }
  for (Camera cam : kSceneCameras) {
    const SensorFrameRef* f = scenario.FindFrame(at, cam);
    std::string boxed;
    for (const VisibleAgent& v : f->visible_agents) {
      if (std::binary_search(p.agent_order.begin(), p.agent_order.end(), v.agent_id)) {
        boxed += (boxed.empty() ? "" : ",") + v.agent_id;
      }
    }
    p.image_slots.push_back({f->uri, "scene", "", at, cam, "red_bbox:" + boxed});
  }
  p.text = TemplateText(kind);
  p.text.replace(p.text.find(kCropsPlaceholder), kCropsPlaceholder.size(), crops);
  return p;
}

PromptPayload BuildScPrompt(const Scenario& scenario, std::optional<int> step) {
  const int at = step.value_or(scenario.history_len);
  const SensorFrameRef* f = scenario.FindFrame(at, Camera::kFront);
  if (f == nullptr) {
    throw DataError("scenario '" + scenario.scenario_id +
                    "': missing FRONT frame at step " + std::to_string(at));
  }
  PromptPayload p;
  p.scenario_id = scenario.scenario_id;
  p.kind = PromptKind::kSc;
  p.step = at;
  p.text = TemplateText(PromptKind::kSc);
  p.image_slots.push_back({f->uri, "scene", "", at, Camera::kFront, ""});
  return p;
}

std::string SerializePayload(const PromptPayload& p) {
  nlohmann::ordered_json j;
  j["scenario_id"] = p.scenario_id;
  j["kind"] = ToString(p.kind);
  j["step"] = p.step;
  j["template_version"] = p.template_version;
  j["text"] = p.text;
  nlohmann::ordered_json slots = nlohmann::ordered_json::array();
  for (const ImageSlot& s : p.image_slots) {
    slots.push_back({{"uri", s.uri},
                     {"role", s.role},
                     {"agent_id", s.agent_id},
                     {"step", s.step},
                     {"camera", ToString(s.camera)},
                     {"annotation", s.annotation}});
  }
  j["image_slots"] = std::move(slots);
  j["agent_order"] = p.agent_order;
  return j.dump();
}

}  // namespace semcast
