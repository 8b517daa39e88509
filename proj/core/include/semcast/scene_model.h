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

// Scenario data model: agent tracks, map polylines, traffic-light states and
// camera frame references, plus the JSON-lines scenario file format.

#ifndef SEMCAST_SCENE_MODEL_H_
#define SEMCAST_SCENE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace semcast {

inline constexpr int kScenarioSchemaVersion = 1;

enum class AgentCategory { kVehicle, kPedestrian, kOther };

enum class MapElementKind { kLane, kRoadBoundary, kCrosswalk };

enum class LightState { kRed, kYellow, kGreen, kUnknown };

enum class Camera {
  kFront,
  kFrontLeft,
  kFrontRight,
  kSideLeft,
  kSideRight,
  kRearLeft,
  kRearRight,
  kRear,
};

// Latent behavior label. Visible to the synthetic generator and the mock
// oracle only; the predictor never reads it.
enum class Intent {
  kKeepForward,
  kSlowDown,
  kStop,
  kTurnLeft,
  kTurnRight,
  kUTurn,
  kParked,
  kWalkSidewalk,
  kCross,
  kJaywalk,
  kWaiting,
};

std::string_view ToString(AgentCategory c);
std::string_view ToString(MapElementKind k);
std::string_view ToString(LightState s);
std::string_view ToString(Camera c);
std::string_view ToString(Intent i);
AgentCategory AgentCategoryFromString(std::string_view s);
MapElementKind MapElementKindFromString(std::string_view s);
LightState LightStateFromString(std::string_view s);
Camera CameraFromString(std::string_view s);
Intent IntentFromString(std::string_view s);

// Wraps an angle into (-pi, pi].
double NormalizeHeading(double radians);

struct AgentState {
  int step = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double heading = 0.0;
  bool valid = false;

  Eigen::Vector2d position() const { return {x, y}; }
  bool operator==(const AgentState&) const = default;
};

// Time-indexed states of one agent; states[k] holds step k + 1.
struct AgentTrack {
  std::string agent_id;
  AgentCategory category = AgentCategory::kOther;
  std::vector<AgentState> states;

  const AgentState& at(int step) const { return states.at(step - 1); }
  bool operator==(const AgentTrack&) const = default;
};

struct MapElement {
  std::string element_id;
  MapElementKind kind = MapElementKind::kLane;
  std::vector<Eigen::Vector2d> polyline;

  bool operator==(const MapElement&) const = default;
};

struct TrafficLightState {
  std::string element_id;
  int step = 0;
  LightState state = LightState::kUnknown;

  bool operator==(const TrafficLightState&) const = default;
};

struct VisibleAgent {
  std::string agent_id;
  double occlusion_fraction = 0.0;
  double range = 0.0;

  bool operator==(const VisibleAgent&) const = default;
};

// Camera frame reference. Pixels are not modeled; the frame carries the
// visibility metadata needed to decide which agents are prompted.
struct SensorFrameRef {
  int step = 0;
  Camera camera = Camera::kFront;
  std::string uri;
  std::vector<VisibleAgent> visible_agents;

  bool operator==(const SensorFrameRef&) const = default;
};

struct AgentLatent {
  Intent intent = Intent::kKeepForward;
  // First step at which the intent is observable (signal on, posture change).
  int reveal_step = 1;
  std::string vehicle_type = "SEDAN";
  bool emergency = false;
  bool micromobility = false;

  bool operator==(const AgentLatent&) const = default;
};

struct SceneLatent {
  std::string weather = "SUNNY";
  std::string time_of_day = "DAY";
  std::string road_type = "RESIDENTIAL";
  std::string intersection = "YES";

  bool operator==(const SceneLatent&) const = default;
};

struct Scenario {
  std::string scenario_id;
  int history_len = 0;  // t0
  int horizon = 0;      // T, the last step index
  double step_hz = 10.0;
  std::vector<AgentTrack> agents;  // sorted by agent_id
  std::vector<MapElement> map_elements;
  std::vector<TrafficLightState> traffic_lights;
  std::vector<SensorFrameRef> sensor_frames;
  // Agents to forecast. Empty means every agent valid at t0 with a full future.
  std::vector<std::string> target_agents;
  std::map<std::string, AgentLatent> ground_truth_intent;
  std::optional<SceneLatent> ground_truth_scene;

  int future_len() const { return horizon - history_len; }
  const AgentTrack* FindAgent(std::string_view agent_id) const;
  // Resolved target list (explicit targets, or all eligible agents).
  std::vector<std::string> Targets() const;
  const SensorFrameRef* FindFrame(int step, Camera camera) const;

  bool operator==(const Scenario&) const = default;
};

// Throws DataError describing the first violated invariant.
void ValidateScenario(const Scenario& scenario);

enum class ScenarioFamily { kAmbiguousTurn, kJaywalkingPedestrian, kParkedVehicle };

std::string_view ToString(ScenarioFamily f);
ScenarioFamily ScenarioFamilyFromString(std::string_view s);

struct TimingProfile {
  double step_hz = 10.0;
  int history_len = 10;
  int future_len = 80;

  // 10 Hz, 1 s history, 8 s future.
  static TimingProfile WomdStyle() { return {10.0, 10, 80}; }
  // 2 Hz, 2 s history, 6 s future.
  static TimingProfile NuscStyle() { return {2.0, 4, 12}; }
};

struct GeneratorConfig {
  int num_scenarios = 100;
  TimingProfile timing = TimingProfile::WomdStyle();
  std::map<ScenarioFamily, double> family_mix = {
      {ScenarioFamily::kAmbiguousTurn, 1.0}};
  std::map<Intent, double> turn_intent_mix = {
      {Intent::kKeepForward, 0.20}, {Intent::kSlowDown, 0.15},
      {Intent::kStop, 0.15},        {Intent::kTurnLeft, 0.20},
      {Intent::kTurnRight, 0.20},   {Intent::kUTurn, 0.10}};
  std::map<Intent, double> pedestrian_intent_mix = {
      {Intent::kWalkSidewalk, 0.3},
      {Intent::kCross, 0.25},
      {Intent::kJaywalk, 0.25},
      {Intent::kWaiting, 0.2}};
  std::map<Intent, double> parked_intent_mix = {{Intent::kParked, 1.0}};
  // Non-target agents per scenario (0..3).
  int context_agents = 2;
  // Std-dev of observation noise on history positions, meters.
  double position_noise_m = 0.05;
  // Fraction of target agents that are heavily occluded in every frame.
  double occluded_fraction = 0.1;
  // Fraction of scenes with non-sunny weather (slower future speeds).
  double adverse_weather_fraction = 0.3;
  // Intent reveal time is uniform over [t0 - window, t0].
  double reveal_window_s = 3.0;
  std::string id_prefix = "scn";
};

void ValidateGeneratorConfig(const GeneratorConfig& config);

// Deterministic in (config, seed). Scenario i depends only on (config, seed, i)
// and the up-front quota assignment, so generation order does not matter.
std::vector<Scenario> GenerateSynthetic(const GeneratorConfig& config,
                                        uint64_t seed);

// Scenario JSON-lines IO. Loading re-validates every record.
std::string SerializeScenario(const Scenario& scenario);
Scenario DeserializeScenario(std::string_view line, int line_number = 1);
void SaveScenarios(const std::vector<Scenario>& scenarios,
                   const std::filesystem::path& path);
std::vector<Scenario> LoadScenarios(const std::filesystem::path& path);

// Fingerprint of an ordered scenario-id list; identifies an evaluation split.
std::string SplitFingerprint(const std::vector<Scenario>& scenarios);

}  // namespace semcast

#endif  // SEMCAST_SCENE_MODEL_H_
