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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace {

using Json = nlohmann::ordered_json;

template <typename E, size_t N>
E EnumFromString(const std::array<std::pair<E, std::string_view>, N>& table,
                 std::string_view s, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw DataError("unknown " + std::string(what) + " '" + std::string(s) +
                  "'");
}

template <typename E, size_t N>
std::string_view EnumToString(
    const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "UNKNOWN";
}

constexpr std::array<std::pair<AgentCategory, std::string_view>, 3>
    kCategoryNames = {{{AgentCategory::kVehicle, "VEHICLE"},
                       {AgentCategory::kPedestrian, "PEDESTRIAN"},
                       {AgentCategory::kOther, "OTHER"}}};
constexpr std::array<std::pair<MapElementKind, std::string_view>, 3>
    kKindNames = {{{MapElementKind::kLane, "LANE"},
                   {MapElementKind::kRoadBoundary, "ROAD_BOUNDARY"},
                   {MapElementKind::kCrosswalk, "CROSSWALK"}}};
constexpr std::array<std::pair<LightState, std::string_view>, 4> kLightNames =
    {{{LightState::kRed, "RED"},
      {LightState::kYellow, "YELLOW"},
      {LightState::kGreen, "GREEN"},
      {LightState::kUnknown, "UNKNOWN"}}};
constexpr std::array<std::pair<Camera, std::string_view>, 8> kCameraNames = {
    {{Camera::kFront, "FRONT"},
     {Camera::kFrontLeft, "FRONT_LEFT"},
     {Camera::kFrontRight, "FRONT_RIGHT"},
     {Camera::kSideLeft, "SIDE_LEFT"},
     {Camera::kSideRight, "SIDE_RIGHT"},
     {Camera::kRearLeft, "REAR_LEFT"},
     {Camera::kRearRight, "REAR_RIGHT"},
     {Camera::kRear, "REAR"}}};
constexpr std::array<std::pair<Intent, std::string_view>, 11> kIntentNames = {
    {{Intent::kKeepForward, "KEEP_FORWARD"},
     {Intent::kSlowDown, "SLOW_DOWN"},
     {Intent::kStop, "STOP"},
     {Intent::kTurnLeft, "TURN_LEFT"},
     {Intent::kTurnRight, "TURN_RIGHT"},
     {Intent::kUTurn, "U_TURN"},
     {Intent::kParked, "PARKED"},
     {Intent::kWalkSidewalk, "WALK_SIDEWALK"},
     {Intent::kCross, "CROSS"},
     {Intent::kJaywalk, "JAYWALK"},
     {Intent::kWaiting, "WAITING"}}};
constexpr std::array<std::pair<ScenarioFamily, std::string_view>, 3>
    kFamilyNames = {{{ScenarioFamily::kAmbiguousTurn, "ambiguous_turn"},
                     {ScenarioFamily::kJaywalkingPedestrian,
                      "jaywalking_pedestrian"},
                     {ScenarioFamily::kParkedVehicle, "parked_vehicle"}}};

// Field access that reports the record line and field name on failure.
class RecordReader {
 public:
  explicit RecordReader(int line) : line_(line) {}

  const Json& Field(const Json& obj, const char* name) const {
    if (!obj.is_object()) throw ParseError(line_, name, "expected an object");
    auto it = obj.find(name);
    if (it == obj.end()) throw ParseError(line_, name, "missing field");
    return *it;
  }
  double Number(const Json& obj, const char* name) const {
    const Json& v = Field(obj, name);
    if (!v.is_number()) throw ParseError(line_, name, "expected a number");
    return v.get<double>();
  }
  int Int(const Json& obj, const char* name) const {
    const Json& v = Field(obj, name);
    if (!v.is_number_integer()) {
      throw ParseError(line_, name, "expected an integer");
    }
    return v.get<int>();
  }
  bool Bool(const Json& obj, const char* name) const {
    const Json& v = Field(obj, name);
    if (!v.is_boolean()) throw ParseError(line_, name, "expected a boolean");
    return v.get<bool>();
  }
  std::string String(const Json& obj, const char* name) const {
    const Json& v = Field(obj, name);
    if (!v.is_string()) throw ParseError(line_, name, "expected a string");
    return v.get<std::string>();
  }
  const Json& Array(const Json& obj, const char* name) const {
    const Json& v = Field(obj, name);
    if (!v.is_array()) throw ParseError(line_, name, "expected an array");
    return v;
  }
  template <typename F>
  auto Enum(const Json& obj, const char* name, F&& from_string) const {
    std::string s = String(obj, name);
    try {
      return from_string(s);
    } catch (const DataError& e) {
      throw ParseError(line_, name, e.what());
    }
  }
  int line() const { return line_; }

 private:
  int line_;
};

Json PointToJson(const Eigen::Vector2d& p) { return Json::array({p.x(), p.y()}); }

}  // namespace

std::string_view ToString(AgentCategory c) { return EnumToString(kCategoryNames, c); }
std::string_view ToString(MapElementKind k) { return EnumToString(kKindNames, k); }
std::string_view ToString(LightState s) { return EnumToString(kLightNames, s); }
std::string_view ToString(Camera c) { return EnumToString(kCameraNames, c); }
std::string_view ToString(Intent i) { return EnumToString(kIntentNames, i); }
std::string_view ToString(ScenarioFamily f) { return EnumToString(kFamilyNames, f); }

AgentCategory AgentCategoryFromString(std::string_view s) {
  return EnumFromString(kCategoryNames, s, "agent category");
}
MapElementKind MapElementKindFromString(std::string_view s) {
  return EnumFromString(kKindNames, s, "map element kind");
}
LightState LightStateFromString(std::string_view s) {
  return EnumFromString(kLightNames, s, "traffic light state");
}
Camera CameraFromString(std::string_view s) {
  return EnumFromString(kCameraNames, s, "camera");
}
Intent IntentFromString(std::string_view s) {
  return EnumFromString(kIntentNames, s, "intent");
}
ScenarioFamily ScenarioFamilyFromString(std::string_view s) {
  return EnumFromString(kFamilyNames, s, "scenario family");
}

double NormalizeHeading(double radians) {
  constexpr double kPi = std::numbers::pi;
  double h = std::remainder(radians, 2.0 * kPi);
  if (h <= -kPi) h += 2.0 * kPi;
  if (h > kPi) h -= 2.0 * kPi;
  return h;
}

const AgentTrack* Scenario::FindAgent(std::string_view agent_id) const {
  auto it = std::lower_bound(
      agents.begin(), agents.end(), agent_id,
      [](const AgentTrack& a, std::string_view id) { return a.agent_id < id; });
  if (it == agents.end() || it->agent_id != agent_id) return nullptr;
  return &*it;
}

std::vector<std::string> Scenario::Targets() const {
  if (!target_agents.empty()) return target_agents;
  std::vector<std::string> out;
  for (const AgentTrack& a : agents) {
    if (static_cast<int>(a.states.size()) < horizon) continue;
    bool ok = a.at(history_len).valid;
    for (int s = history_len + 1; ok && s <= horizon; ++s) ok = a.at(s).valid;
    if (ok) out.push_back(a.agent_id);
  }
  return out;
}

const SensorFrameRef* Scenario::FindFrame(int step, Camera camera) const {
  for (const SensorFrameRef& f : sensor_frames) {
    if (f.step == step && f.camera == camera) return &f;
  }
  return nullptr;
}

void ValidateScenario(const Scenario& s) {
  auto fail = [&](const std::string& what) {
    throw DataError("scenario '" + s.scenario_id + "': " + what);
  };
  if (s.history_len < 1) fail("history_len must be >= 1");
  if (s.horizon <= s.history_len) fail("horizon must exceed history_len");
  if (!(s.step_hz > 0.0)) fail("step_hz must be positive");
  for (size_t i = 1; i < s.agents.size(); ++i) {
    if (!(s.agents[i - 1].agent_id < s.agents[i].agent_id)) {
      fail("agents must be sorted by unique agent_id");
    }
  }
  for (const AgentTrack& a : s.agents) {
    if (static_cast<int>(a.states.size()) < s.history_len) {
      fail("agent '" + a.agent_id + "' does not cover the history window");
    }
    if (static_cast<int>(a.states.size()) > s.horizon) {
      fail("agent '" + a.agent_id + "' has states beyond the horizon");
    }
    for (size_t k = 0; k < a.states.size(); ++k) {
      const AgentState& st = a.states[k];
      if (st.step != static_cast<int>(k) + 1) {
        fail("agent '" + a.agent_id + "' states are not step-indexed");
      }
      if (!std::isfinite(st.x) || !std::isfinite(st.y) ||
          !std::isfinite(st.vx) || !std::isfinite(st.vy)) {
        fail("agent '" + a.agent_id + "' has non-finite state");
      }
      if (!(st.heading > -std::numbers::pi && st.heading <= std::numbers::pi)) {
        fail("agent '" + a.agent_id + "' heading outside (-pi, pi]");
      }
    }
  }
  for (const std::string& t : s.target_agents) {
    const AgentTrack* a = s.FindAgent(t);
    if (a == nullptr) fail("unknown target agent '" + t + "'");
  }
  for (const MapElement& m : s.map_elements) {
    if (m.polyline.size() < 2) {
      fail("map element '" + m.element_id + "' has fewer than 2 points");
    }
    for (size_t i = 1; i < m.polyline.size(); ++i) {
      if (m.polyline[i] == m.polyline[i - 1]) {
        fail("map element '" + m.element_id + "' repeats a point");
      }
    }
  }
  std::set<std::pair<std::string, int>> lights;
  for (const TrafficLightState& l : s.traffic_lights) {
    if (!lights.emplace(l.element_id, l.step).second) {
      fail("duplicate traffic light state for '" + l.element_id + "'");
    }
  }
  for (const SensorFrameRef& f : s.sensor_frames) {
    for (const VisibleAgent& v : f.visible_agents) {
      if (!(v.occlusion_fraction >= 0.0 && v.occlusion_fraction <= 1.0)) {
        fail("occlusion_fraction outside [0, 1]");
      }
      if (!(v.range > 0.0)) fail("visible agent range must be positive");
    }
  }
}

std::string SerializeScenario(const Scenario& s) {
  Json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["scenario_id"] = s.scenario_id;
  j["history_len"] = s.history_len;
  j["horizon"] = s.horizon;
  j["step_hz"] = s.step_hz;
  Json agents = Json::array();
  for (const AgentTrack& a : s.agents) {
    Json states = Json::array();
    for (const AgentState& st : a.states) {
      states.push_back({{"step", st.step},
                        {"x", st.x},
                        {"y", st.y},
                        {"vx", st.vx},
                        {"vy", st.vy},
                        {"heading", st.heading},
                        {"valid", st.valid}});
    }
    agents.push_back({{"agent_id", a.agent_id},
                      {"category", ToString(a.category)},
                      {"states", std::move(states)}});
  }
  j["agents"] = std::move(agents);
  Json map = Json::array();
  for (const MapElement& m : s.map_elements) {
    Json poly = Json::array();
    for (const auto& p : m.polyline) poly.push_back(PointToJson(p));
    map.push_back({{"element_id", m.element_id},
                   {"kind", ToString(m.kind)},
                   {"polyline", std::move(poly)}});
  }
  j["map_elements"] = std::move(map);
  Json lights = Json::array();
  for (const TrafficLightState& l : s.traffic_lights) {
    lights.push_back({{"element_id", l.element_id},
                      {"step", l.step},
                      {"state", ToString(l.state)}});
  }
  j["traffic_lights"] = std::move(lights);
  Json frames = Json::array();
  for (const SensorFrameRef& f : s.sensor_frames) {
    Json vis = Json::array();
    for (const VisibleAgent& v : f.visible_agents) {
      vis.push_back({{"agent_id", v.agent_id},
                     {"occlusion_fraction", v.occlusion_fraction},
                     {"range", v.range}});
    }
    frames.push_back({{"step", f.step},
                      {"camera", ToString(f.camera)},
                      {"uri", f.uri},
                      {"visible_agents", std::move(vis)}});
  }
  j["sensor_frames"] = std::move(frames);
  j["target_agents"] = s.target_agents;
  if (!s.ground_truth_intent.empty()) {
    Json gt = Json::object();
    for (const auto& [id, lat] : s.ground_truth_intent) {
      gt[id] = {{"intent", ToString(lat.intent)},
                {"reveal_step", lat.reveal_step},
                {"vehicle_type", lat.vehicle_type},
                {"emergency", lat.emergency},
                {"micromobility", lat.micromobility}};
    }
    j["ground_truth_intent"] = std::move(gt);
  }
  if (s.ground_truth_scene) {
    const SceneLatent& sc = *s.ground_truth_scene;
    j["ground_truth_scene"] = {{"weather", sc.weather},
                               {"time_of_day", sc.time_of_day},
                               {"road_type", sc.road_type},
                               {"intersection", sc.intersection}};
  }
  return j.dump();
}

Scenario DeserializeScenario(std::string_view line, int line_number) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_number, "<record>", e.what());
  }
  RecordReader r(line_number);
  const int version = r.Int(j, "schema_version");
  if (version != kScenarioSchemaVersion) {
    throw ParseError(line_number, "schema_version",
                     "unsupported version " + std::to_string(version));
  }
  Scenario s;
  s.scenario_id = r.String(j, "scenario_id");
  s.history_len = r.Int(j, "history_len");
  s.horizon = r.Int(j, "horizon");
  s.step_hz = r.Number(j, "step_hz");
  for (const Json& a : r.Array(j, "agents")) {
    AgentTrack track;
    track.agent_id = r.String(a, "agent_id");
    track.category = r.Enum(a, "category", AgentCategoryFromString);
    for (const Json& st : r.Array(a, "states")) {
      AgentState state;
      state.step = r.Int(st, "step");
      state.x = r.Number(st, "x");
      state.y = r.Number(st, "y");
      state.vx = r.Number(st, "vx");
      state.vy = r.Number(st, "vy");
      state.heading = r.Number(st, "heading");
      state.valid = r.Bool(st, "valid");
      track.states.push_back(state);
    }
    s.agents.push_back(std::move(track));
  }
  for (const Json& m : r.Array(j, "map_elements")) {
    MapElement el;
    el.element_id = r.String(m, "element_id");
    el.kind = r.Enum(m, "kind", MapElementKindFromString);
    for (const Json& p : r.Array(m, "polyline")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() ||
          !p[1].is_number()) {
        throw ParseError(line_number, "polyline", "expected [x, y] pairs");
      }
      el.polyline.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    s.map_elements.push_back(std::move(el));
  }
  for (const Json& l : r.Array(j, "traffic_lights")) {
    s.traffic_lights.push_back({r.String(l, "element_id"), r.Int(l, "step"),
                                r.Enum(l, "state", LightStateFromString)});
  }
  for (const Json& f : r.Array(j, "sensor_frames")) {
    SensorFrameRef frame;
    frame.step = r.Int(f, "step");
    frame.camera = r.Enum(f, "camera", CameraFromString);
    frame.uri = r.String(f, "uri");
    for (const Json& v : r.Array(f, "visible_agents")) {
      frame.visible_agents.push_back({r.String(v, "agent_id"),
                                      r.Number(v, "occlusion_fraction"),
                                      r.Number(v, "range")});
    }
    s.sensor_frames.push_back(std::move(frame));
  }
  if (j.contains("target_agents")) {
    for (const Json& t : r.Array(j, "target_agents")) {
      if (!t.is_string()) {
        throw ParseError(line_number, "target_agents", "expected strings");
      }
      s.target_agents.push_back(t.get<std::string>());
    }
  }
  if (j.contains("ground_truth_intent")) {
    const Json& gt = r.Field(j, "ground_truth_intent");
    if (!gt.is_object()) {
      throw ParseError(line_number, "ground_truth_intent", "expected object");
    }
    for (const auto& [id, lat] : gt.items()) {
      AgentLatent latent;
      latent.intent = r.Enum(lat, "intent", IntentFromString);
      latent.reveal_step = r.Int(lat, "reveal_step");
      latent.vehicle_type = r.String(lat, "vehicle_type");
      latent.emergency = r.Bool(lat, "emergency");
      latent.micromobility = r.Bool(lat, "micromobility");
      s.ground_truth_intent.emplace(id, latent);
    }
  }
  if (j.contains("ground_truth_scene")) {
    const Json& sc = r.Field(j, "ground_truth_scene");
    s.ground_truth_scene =
        SceneLatent{r.String(sc, "weather"), r.String(sc, "time_of_day"),
                    r.String(sc, "road_type"), r.String(sc, "intersection")};
  }
  try {
    ValidateScenario(s);
  } catch (const DataError& e) {
    throw ParseError(line_number, "<invariant>", e.what());
  }
  return s;
}

void SaveScenarios(const std::vector<Scenario>& scenarios,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Scenario& s : scenarios) out << SerializeScenario(s) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<Scenario> LoadScenarios(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<Scenario> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    out.push_back(DeserializeScenario(line, line_number));
  }
  return out;
}

std::string SplitFingerprint(const std::vector<Scenario>& scenarios) {
  std::string ids;
  for (const Scenario& s : scenarios) {
    ids += s.scenario_id;
    ids.push_back('\n');
  }
  return ShortFingerprint(ids);
}

}  // namespace semcast
