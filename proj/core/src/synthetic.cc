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

// Synthetic four-way-intersection scenarios. The target agent's future is
// drawn from a latent intent that its kinematic history does not reveal.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "semcast/common.h"
#include "semcast/scene_model.h"

namespace semcast {
namespace {

using Eigen::Vector2d;
constexpr double kPi = std::numbers::pi;
constexpr double kLaneOffset = 1.75;
constexpr double kStopLine = 8.0;
constexpr double kSidewalk = 5.5;
constexpr double kShoulder = 4.0;
constexpr double kArmLength = 80.0;
constexpr int kSubsteps = 10;

// Arc-length parameterized polyline.
class Path {
 public:
  void Add(const Vector2d& p) {
    if (!points_.empty()) {
      const double d = (p - points_.back()).norm();
      if (d < 1e-9) return;
      cumulative_.push_back(cumulative_.back() + d);
    } else {
      cumulative_.push_back(0.0);
    }
    points_.push_back(p);
  }
  void AddArc(const Vector2d& center, double radius, double from, double to) {
    const int n = std::max(8, static_cast<int>(std::abs(to - from) * radius / 0.25));
    for (int i = 0; i <= n; ++i) {
      const double a = from + (to - from) * i / n;
      Add(center + radius * Vector2d(std::cos(a), std::sin(a)));
    }
  }
  double Length() const { return cumulative_.back(); }

  // Position and unit tangent at arc length s (extrapolated linearly).
  std::pair<Vector2d, Vector2d> At(double s) const {
    size_t i = 1;
    if (s <= 0.0) {
      i = 1;
    } else if (s >= Length()) {
      i = points_.size() - 1;
    } else {
      i = static_cast<size_t>(
          std::upper_bound(cumulative_.begin(), cumulative_.end(), s) -
          cumulative_.begin());
    }
    const Vector2d a = points_[i - 1];
    const Vector2d b = points_[i];
    const double seg = cumulative_[i] - cumulative_[i - 1];
    const Vector2d t = (b - a) / seg;
    return {a + t * (s - cumulative_[i - 1]), t};
  }

 private:
  std::vector<Vector2d> points_;
  std::vector<double> cumulative_;
};

// Rigid transform from the canonical intersection frame into the world.
struct Pose {
  double theta = 0.0;
  Vector2d offset = Vector2d::Zero();

  Vector2d Point(const Vector2d& p) const { return Rotate(p) + offset; }
  Vector2d Rotate(const Vector2d& v) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
  }
};

std::vector<int> QuotaAssignment(const std::vector<double>& weights, int n,
                                 Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<int> counts(weights.size(), 0);
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t k = 0; k < weights.size(); ++k) {
    const double exact = n * weights[k] / total;
    counts[k] = static_cast<int>(std::floor(exact));
    assigned += counts[k];
    remainders.emplace_back(exact - counts[k], k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t r = 0; assigned < n; ++r, ++assigned) {
    ++counts[remainders[r % remainders.size()].second];
  }
  std::vector<int> out;
  out.reserve(n);
  for (size_t k = 0; k < counts.size(); ++k) {
    out.insert(out.end(), counts[k], static_cast<int>(k));
  }
  rng.Shuffle(out);
  return out;
}

template <typename K>
std::vector<K> Keys(const std::map<K, double>& m) {
  std::vector<K> out;
  for (const auto& [k, w] : m) out.push_back(k);
  return out;
}

template <typename K>
std::vector<double> Weights(const std::map<K, double>& m) {
  std::vector<double> out;
  for (const auto& [k, w] : m) out.push_back(w);
  return out;
}

template <typename T>
T Pick(Rng& rng, const std::vector<std::pair<T, double>>& options) {
  double total = 0.0;
  for (const auto& o : options) total += o.second;
  double u = rng.Uniform() * total;
  for (const auto& o : options) {
    if (u < o.second) return o.first;
    u -= o.second;
  }
  return options.back().first;
}

// Speed controller used to roll a route forward in time.
struct SpeedPlan {
  double before_target = 0.0;  // target speed until `switch_s`
  double before_rate = 1.5;
  double after_target = 0.0;
  double after_rate = 1.5;
  double switch_s = 1e18;
  double stop_at = 1e18;  // hard stop position (decelerating to rest)
};

struct Rollout {
  std::vector<double> s;
  std::vector<double> v;
};

Rollout RollForward(double s0, double v0, const SpeedPlan& plan, int steps,
                    double hz) {
  Rollout r;
  double s = s0, v = v0;
  const double dt = 1.0 / (hz * kSubsteps);
  const bool stopping = plan.stop_at < 1e17;
  const double stop_decel =
      stopping ? v0 * v0 / (2.0 * std::max(plan.stop_at - s0, 0.5)) : 0.0;
  for (int k = 0; k < steps; ++k) {
    for (int sub = 0; sub < kSubsteps; ++sub) {
      if (stopping) {
        v = std::max(0.0, v - stop_decel * dt);
        s = std::min(s + v * dt, plan.stop_at);
        continue;
      }
      const bool before = s < plan.switch_s;
      const double target = before ? plan.before_target : plan.after_target;
      const double rate = before ? plan.before_rate : plan.after_rate;
      if (v < target) {
        v = std::min(target, v + rate * dt);
      } else {
        v = std::max(target, v - rate * dt);
      }
      s += v * dt;
    }
    r.s.push_back(s);
    r.v.push_back(v);
  }
  return r;
}

struct AgentBuild {
  std::string id;
  AgentCategory category;
  AgentLatent latent;
  std::vector<AgentState> states;  // canonical frame, before noise
  double base_occlusion = 0.0;
};

// Fills states for steps 1..T from a path: constant speed v0 through the
// history, then `future` for the remaining steps.
std::vector<AgentState> StatesAlongPath(const Path& path, double s_t0,
                                        double v0, const Rollout& future,
                                        int t0, double hz) {
  std::vector<AgentState> out;
  auto make = [&](int step, double s, double v) {
    auto [p, t] = path.At(s);
    AgentState st;
    st.step = step;
    st.x = p.x();
    st.y = p.y();
    st.vx = v * t.x();
    st.vy = v * t.y();
    st.heading = NormalizeHeading(std::atan2(t.y(), t.x()));
    st.valid = true;
    return st;
  };
  for (int step = 1; step <= t0; ++step) {
    out.push_back(make(step, s_t0 - v0 * (t0 - step) / hz, v0));
  }
  for (size_t k = 0; k < future.s.size(); ++k) {
    out.push_back(make(t0 + 1 + static_cast<int>(k), future.s[k], future.v[k]));
  }
  return out;
}

std::vector<AgentState> Stationary(const Vector2d& p, double heading, int total) {
  std::vector<AgentState> out;
  for (int step = 1; step <= total; ++step) {
    AgentState st;
    st.step = step;
    st.x = p.x();
    st.y = p.y();
    st.heading = NormalizeHeading(heading);
    st.valid = true;
    out.push_back(st);
  }
  return out;
}

// Northbound vehicle route through the intersection.
Path VehicleRoute(Intent intent, double start_y) {
  Path p;
  p.Add({kLaneOffset, start_y});
  switch (intent) {
    case Intent::kTurnLeft:
      p.Add({kLaneOffset, -kStopLine});
      p.AddArc({-kStopLine, -kStopLine}, kStopLine + kLaneOffset, 0.0, kPi / 2);
      p.Add({-400.0, kLaneOffset});
      break;
    case Intent::kTurnRight:
      p.Add({kLaneOffset, -kStopLine});
      p.AddArc({kStopLine, -kStopLine}, kStopLine - kLaneOffset, kPi, kPi / 2);
      p.Add({400.0, -kLaneOffset});
      break;
    case Intent::kUTurn:
      p.Add({kLaneOffset, -kStopLine});
      p.AddArc({0.0, -kStopLine}, kLaneOffset, 0.0, kPi);
      p.Add({-kLaneOffset, -400.0});
      break;
    default:
      p.Add({kLaneOffset, 400.0});
      break;
  }
  return p;
}

SpeedPlan VehiclePlan(Intent intent, double v0, double s_t0, double stop_line_s,
                      double turn_end_s, double factor) {
  SpeedPlan plan;
  switch (intent) {
    case Intent::kKeepForward:
      plan.before_target = plan.after_target = std::min(1.25 * v0, 13.5) * factor;
      break;
    case Intent::kSlowDown:
      plan.before_target = plan.after_target = 0.35 * v0 * factor;
      plan.before_rate = plan.after_rate = 2.0;
      break;
    case Intent::kStop:
      plan.stop_at = std::max(stop_line_s - 1.0, s_t0 + 1.0);
      break;
    case Intent::kTurnLeft:
    case Intent::kTurnRight:
    case Intent::kUTurn: {
      const double turn_speed = intent == Intent::kTurnLeft    ? 6.0
                                : intent == Intent::kTurnRight ? 4.5
                                                               : 2.5;
      plan.before_target = turn_speed * factor;
      plan.before_rate = 2.5;
      plan.after_target = (intent == Intent::kUTurn ? 8.0 : 9.0) * factor;
      plan.after_rate = 1.5;
      plan.switch_s = turn_end_s;
      break;
    }
    case Intent::kParked:
    default:
      plan.before_target = plan.after_target = 0.0;
      plan.before_rate = plan.after_rate = 10.0;
      break;
  }
  return plan;
}

double TurnEndArcLength(Intent intent, double start_y) {
  const double approach = -kStopLine - start_y;
  switch (intent) {
    case Intent::kTurnLeft:
      return approach + (kStopLine + kLaneOffset) * kPi / 2;
    case Intent::kTurnRight:
      return approach + (kStopLine - kLaneOffset) * kPi / 2;
    case Intent::kUTurn:
      return approach + kLaneOffset * kPi;
    default:
      return 1e18;
  }
}

std::string VehicleType(Rng& rng) {
  return Pick<std::string>(rng, {{"SEDAN", 0.4},
                                 {"SUV", 0.3},
                                 {"TRUCK", 0.15},
                                 {"BUS", 0.05},
                                 {"OTHER", 0.1}});
}

double TypeFactor(const std::string& vehicle_type) {
  return (vehicle_type == "TRUCK" || vehicle_type == "BUS") ? 0.9 : 1.0;
}

AgentBuild BuildTurnTarget(Intent intent, const TimingProfile& tp,
                           double factor, Rng& rng) {
  AgentBuild b;
  b.category = AgentCategory::kVehicle;
  b.latent.intent = intent;
  b.latent.vehicle_type = VehicleType(rng);
  b.latent.emergency = rng.Bernoulli(0.03);
  const double d = rng.Uniform(12.0, 35.0);
  const double v0 = rng.Uniform(7.0, 11.0);
  const double y0 = -kStopLine - d;
  const double start_y = y0 - v0 * tp.history_len / tp.step_hz - 5.0;
  const Path path = VehicleRoute(intent, start_y);
  const double s_t0 = y0 - start_y;
  const double f = factor * TypeFactor(b.latent.vehicle_type);
  const SpeedPlan plan = VehiclePlan(intent, v0, s_t0, -kStopLine - start_y,
                                     TurnEndArcLength(intent, start_y), f);
  const Rollout future = RollForward(s_t0, v0, plan, tp.future_len, tp.step_hz);
  b.states = StatesAlongPath(path, s_t0, v0, future, tp.history_len, tp.step_hz);
  return b;
}

AgentBuild BuildPedestrianTarget(Intent intent, const TimingProfile& tp,
                                 Rng& rng) {
  AgentBuild b;
  b.category = AgentCategory::kPedestrian;
  b.latent.intent = intent;
  b.latent.micromobility = rng.Bernoulli(0.2);
  const double v0 = b.latent.micromobility ? rng.Uniform(3.0, 4.5)
                                           : rng.Uniform(1.1, 1.6);
  const double y0 = -10.0 - rng.Uniform(2.0, 14.0);
  const double start_y = y0 - v0 * tp.history_len / tp.step_hz - 2.0;
  Path path;
  path.Add({kSidewalk, start_y});
  switch (intent) {
    case Intent::kCross:
      path.Add({kSidewalk, -9.5});
      path.Add({-kSidewalk, -9.5});
      path.Add({-kSidewalk, -400.0});
      break;
    case Intent::kJaywalk:
      path.Add({kSidewalk, y0 + 1.0});
      path.Add({-kSidewalk, y0 + 6.0});
      path.Add({-kSidewalk, -400.0});
      break;
    default:
      path.Add({kSidewalk, 400.0});
      break;
  }
  SpeedPlan plan;
  plan.before_target = plan.after_target = intent == Intent::kWaiting ? 0.0 : v0;
  plan.before_rate = plan.after_rate = 1.5;
  const double s_t0 = y0 - start_y;
  const Rollout future = RollForward(s_t0, v0, plan, tp.future_len, tp.step_hz);
  b.states = StatesAlongPath(path, s_t0, v0, future, tp.history_len, tp.step_hz);
  return b;
}

AgentBuild BuildParkedTarget(Intent intent, const TimingProfile& tp, Rng& rng) {
  AgentBuild b;
  b.category = AgentCategory::kVehicle;
  b.latent.intent = intent;
  b.latent.vehicle_type = VehicleType(rng);
  const Vector2d p(kShoulder, -kStopLine - rng.Uniform(10.0, 40.0));
  if (intent == Intent::kKeepForward) {
    // Pull out from rest along the shoulder line.
    Path path;
    path.Add({kShoulder, p.y() - 1.0});
    path.Add({kShoulder, 400.0});
    SpeedPlan plan;
    plan.before_target = plan.after_target = 8.0;
    plan.before_rate = plan.after_rate = 2.0;
    const Rollout future = RollForward(1.0, 0.0, plan, tp.future_len, tp.step_hz);
    b.states = StatesAlongPath(path, 1.0, 0.0, future, tp.history_len, tp.step_hz);
  } else {
    b.states = Stationary(p, kPi / 2, tp.history_len + tp.future_len);
  }
  return b;
}

std::vector<AgentBuild> BuildContext(int count, const TimingProfile& tp,
                                     Rng& rng) {
  std::vector<AgentBuild> out;
  const int total = tp.history_len + tp.future_len;
  if (count >= 1) {
    AgentBuild b;
    b.category = AgentCategory::kVehicle;
    b.latent.intent = Intent::kParked;
    b.latent.vehicle_type = VehicleType(rng);
    b.states = Stationary({kShoulder, -kStopLine - rng.Uniform(45.0, 60.0)},
                          kPi / 2, total);
    out.push_back(std::move(b));
  }
  if (count >= 2) {
    AgentBuild b;
    b.category = AgentCategory::kPedestrian;
    b.latent.intent = Intent::kWalkSidewalk;
    const double v0 = rng.Uniform(1.1, 1.5);
    const double y0 = -rng.Uniform(20.0, 40.0);
    const double start_y = y0 + v0 * tp.history_len / tp.step_hz + 2.0;
    Path path;
    path.Add({-kSidewalk, start_y});
    path.Add({-kSidewalk, -400.0});
    SpeedPlan plan;
    plan.before_target = plan.after_target = v0;
    const double s_t0 = start_y - y0;
    const Rollout future = RollForward(s_t0, v0, plan, tp.future_len, tp.step_hz);
    b.states = StatesAlongPath(path, s_t0, v0, future, tp.history_len, tp.step_hz);
    out.push_back(std::move(b));
  }
  if (count >= 3) {
    AgentBuild b;
    b.category = AgentCategory::kVehicle;
    b.latent.intent = Intent::kKeepForward;
    b.latent.vehicle_type = VehicleType(rng);
    const double v0 = rng.Uniform(7.0, 10.0);
    const double y0 = rng.Uniform(20.0, 50.0);
    const double start_y = y0 + v0 * tp.history_len / tp.step_hz + 5.0;
    Path path;
    path.Add({-kLaneOffset, start_y});
    path.Add({-kLaneOffset, -400.0});
    SpeedPlan plan;
    plan.before_target = plan.after_target = v0;
    const double s_t0 = start_y - y0;
    const Rollout future = RollForward(s_t0, v0, plan, tp.future_len, tp.step_hz);
    b.states = StatesAlongPath(path, s_t0, v0, future, tp.history_len, tp.step_hz);
    out.push_back(std::move(b));
  }
  return out;
}

// Four arms, each with an inbound and outbound lane, corner boundaries and a
// crosswalk. Canonical frame: intersection centered at the origin.
std::vector<MapElement> IntersectionMap(const Pose& pose) {
  std::vector<MapElement> out;
  const char* arms[] = {"S", "E", "N", "W"};
  for (int a = 0; a < 4; ++a) {
    const double rot = a * kPi / 2;
    Pose arm{rot, Vector2d::Zero()};
    auto line = [&](std::string id, MapElementKind kind,
                    std::vector<Vector2d> pts) {
      MapElement m;
      m.element_id = std::move(id);
      m.kind = kind;
      for (const Vector2d& p : pts) m.polyline.push_back(pose.Point(arm.Point(p)));
      out.push_back(std::move(m));
    };
    std::vector<Vector2d> inbound, outbound;
    for (int k = 0; k <= 8; ++k) {
      const double y = -kArmLength + k * (kArmLength - kStopLine) / 8.0;
      inbound.emplace_back(kLaneOffset, y);
      outbound.emplace_back(-kLaneOffset, -kStopLine - k * (kArmLength - kStopLine) / 8.0);
    }
    line(std::string("lane_in_") + arms[a], MapElementKind::kLane, inbound);
    line(std::string("lane_out_") + arms[a], MapElementKind::kLane, outbound);
    line(std::string("boundary_") + arms[a], MapElementKind::kRoadBoundary,
         {{2 * kLaneOffset + 0.5, -kArmLength},
          {2 * kLaneOffset + 0.5, -2 * kLaneOffset - 0.5},
          {kArmLength, -2 * kLaneOffset - 0.5}});
    line(std::string("crosswalk_") + arms[a], MapElementKind::kCrosswalk,
         {{2 * kLaneOffset + 0.5, -9.5}, {-2 * kLaneOffset - 0.5, -9.5}});
  }
  return out;
}

Scenario BuildScenario(const GeneratorConfig& config, ScenarioFamily family,
                       Intent intent, int index, uint64_t seed) {
  Rng rng(MixSeed(seed, static_cast<uint64_t>(index)));
  const TimingProfile& tp = config.timing;
  const int t0 = tp.history_len;
  const int total = tp.history_len + tp.future_len;

  Scenario s;
  char id[64];
  std::snprintf(id, sizeof(id), "%s-%06d", config.id_prefix.c_str(), index);
  s.scenario_id = id;
  s.history_len = t0;
  s.horizon = total;
  s.step_hz = tp.step_hz;

  SceneLatent scene;
  if (rng.Bernoulli(config.adverse_weather_fraction)) {
    scene.weather = Pick<std::string>(
        rng, {{"RAINY", 0.5}, {"FOGGY", 0.15}, {"SNOWY", 0.15}, {"DARK", 0.2}});
  }
  scene.time_of_day = scene.weather == "DARK"
                          ? "NIGHT"
                          : Pick<std::string>(rng, {{"DAY", 0.8}, {"EVENING", 0.2}});
  scene.road_type = Pick<std::string>(
      rng, {{"RESIDENTIAL", 0.7}, {"SERVICE", 0.2}, {"OTHER", 0.1}});
  const double weather_factor = scene.weather == "SUNNY" ? 1.0 : 0.8;

  AgentBuild target;
  switch (family) {
    case ScenarioFamily::kAmbiguousTurn:
      target = BuildTurnTarget(intent, tp, weather_factor, rng);
      break;
    case ScenarioFamily::kJaywalkingPedestrian:
      target = BuildPedestrianTarget(intent, tp, rng);
      break;
    case ScenarioFamily::kParkedVehicle:
      target = BuildParkedTarget(intent, tp, rng);
      break;
  }
  const int reveal_lo =
      std::max(1, t0 - static_cast<int>(std::lround(config.reveal_window_s * tp.step_hz)));
  target.latent.reveal_step = rng.UniformInt(reveal_lo, t0);
  target.base_occlusion = rng.Bernoulli(config.occluded_fraction)
                              ? rng.Uniform(0.75, 0.95)
                              : rng.Uniform(0.0, 0.4);
  target.id = "a00";

  std::vector<AgentBuild> agents;
  agents.push_back(std::move(target));
  int ctx_index = 1;
  for (AgentBuild& b : BuildContext(config.context_agents, tp, rng)) {
    char cid[16];
    std::snprintf(cid, sizeof(cid), "a%02d", ctx_index++);
    b.id = cid;
    b.latent.reveal_step = 1;
    b.base_occlusion = rng.Uniform(0.0, 0.5);
    agents.push_back(std::move(b));
  }

  Pose pose{rng.Uniform(-kPi, kPi),
            Vector2d(rng.Uniform(-200.0, 200.0), rng.Uniform(-200.0, 200.0))};
  const double noise = config.position_noise_m;
  const double heading_noise = 0.01;
  for (AgentBuild& b : agents) {
    AgentTrack track;
    track.agent_id = b.id;
    track.category = b.category;
    for (const AgentState& c : b.states) {
      AgentState w = c;
      const Vector2d p = pose.Point(c.position());
      const Vector2d v = pose.Rotate({c.vx, c.vy});
      w.x = p.x();
      w.y = p.y();
      w.vx = v.x();
      w.vy = v.y();
      w.heading = NormalizeHeading(c.heading + pose.theta);
      if (c.step < t0) {
        w.x += rng.Normal(0.0, noise);
        w.y += rng.Normal(0.0, noise);
        w.vx += rng.Normal(0.0, 2.0 * noise);
        w.vy += rng.Normal(0.0, 2.0 * noise);
        w.heading = NormalizeHeading(w.heading + rng.Normal(0.0, heading_noise));
      }
      track.states.push_back(w);
    }
    s.agents.push_back(std::move(track));
    s.ground_truth_intent.emplace(b.id, b.latent);
  }
  s.target_agents = {"a00"};
  s.map_elements = IntersectionMap(pose);

  const LightState light =
      rng.Bernoulli(0.7) ? LightState::kGreen : LightState::kUnknown;
  for (const char* arm : {"lane_in_E", "lane_in_N", "lane_in_S", "lane_in_W"}) {
    for (int step = 1; step <= t0; ++step) {
      s.traffic_lights.push_back({arm, step, light});
    }
  }

  // Ego camera rig, stationary behind the target's whole history, facing the
  // intersection.
  double tgt_min_y = -kStopLine;
  for (int step = 1; step <= t0; ++step) {
    const AgentState& st = agents.front().states[step - 1];
    if (st.valid) tgt_min_y = std::min(tgt_min_y, st.y);
  }
  const Vector2d ego(kLaneOffset, tgt_min_y - 12.0);
  const double ego_heading = kPi / 2;
  const Camera cameras[] = {Camera::kFront, Camera::kFrontLeft, Camera::kFrontRight};
  for (int step = 1; step <= t0; ++step) {
    std::vector<VisibleAgent> visible[3];
    for (const AgentBuild& b : agents) {
      const AgentState& st = b.states[step - 1];
      if (!st.valid) continue;
      const Vector2d rel = Pose{-ego_heading, Vector2d::Zero()}.Rotate(
          st.position() - ego);
      const double bearing = std::atan2(rel.y(), rel.x());
      int cam = -1;
      if (std::abs(bearing) <= 0.61) {
        cam = 0;
      } else if (bearing > 0.61 && bearing <= 1.75) {
        cam = 1;
      } else if (bearing < -0.61 && bearing >= -1.75) {
        cam = 2;
      }
      if (cam < 0) continue;
      const double occ =
          std::clamp(b.base_occlusion + rng.Uniform(-0.05, 0.05), 0.0, 1.0);
      visible[cam].push_back({b.id, occ, std::max(rel.norm(), 0.5)});
    }
    for (int c = 0; c < 3; ++c) {
      char uri[160];
      std::snprintf(uri, sizeof(uri), "synthetic://%s/%s/%03d", id,
                    std::string(ToString(cameras[c])).c_str(), step);
      s.sensor_frames.push_back({step, cameras[c], uri, std::move(visible[c])});
    }
  }
  s.ground_truth_scene = scene;
  return s;
}

}  // namespace

void ValidateGeneratorConfig(const GeneratorConfig& c) {
  if (c.num_scenarios <= 0) throw ConfigError("num_scenarios must be positive");
  if (c.timing.history_len < 1) throw ConfigError("history_len must be >= 1");
  if (c.timing.future_len < 1) {
    throw ConfigError("horizon must exceed the history length");
  }
  if (!(c.timing.step_hz > 0.0)) throw ConfigError("step_hz must be positive");
  if (c.context_agents < 0 || c.context_agents > 3) {
    throw ConfigError("context_agents must be in [0, 3]");
  }
  auto check_mix = [](const auto& mix, const char* what) {
    double total = 0.0;
    for (const auto& [k, w] : mix) {
      if (!(w >= 0.0)) throw ConfigError(std::string(what) + " has a negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError(std::string(what) + " is empty");
  };
  check_mix(c.family_mix, "family_mix");
  auto check_intents = [&](const std::map<Intent, double>& mix, const char* what,
                           std::initializer_list<Intent> allowed) {
    check_mix(mix, what);
    for (const auto& [k, w] : mix) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        throw ConfigError(std::string(what) + " contains unsupported intent " +
                          std::string(ToString(k)));
      }
    }
  };
  check_intents(c.turn_intent_mix, "turn_intent_mix",
                {Intent::kKeepForward, Intent::kSlowDown, Intent::kStop,
                 Intent::kTurnLeft, Intent::kTurnRight, Intent::kUTurn});
  check_intents(c.pedestrian_intent_mix, "pedestrian_intent_mix",
                {Intent::kWalkSidewalk, Intent::kCross, Intent::kJaywalk,
                 Intent::kWaiting});
  check_intents(c.parked_intent_mix, "parked_intent_mix",
                {Intent::kParked, Intent::kKeepForward, Intent::kStop});
  for (double p : {c.occluded_fraction, c.adverse_weather_fraction}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("fractions must be in [0, 1]");
  }
  if (!(c.position_noise_m >= 0.0)) throw ConfigError("noise must be >= 0");
}

std::vector<Scenario> GenerateSynthetic(const GeneratorConfig& config,
                                        uint64_t seed) {
  ValidateGeneratorConfig(config);
  Rng assign_rng(MixSeed(seed, 0xa551'9e00ULL));
  const std::vector<ScenarioFamily> families = Keys(config.family_mix);
  const std::vector<int> family_of =
      QuotaAssignment(Weights(config.family_mix), config.num_scenarios, assign_rng);

  std::vector<Intent> intent_of(config.num_scenarios, Intent::kKeepForward);
  for (size_t f = 0; f < families.size(); ++f) {
    const std::map<Intent, double>& mix =
        families[f] == ScenarioFamily::kAmbiguousTurn ? config.turn_intent_mix
        : families[f] == ScenarioFamily::kJaywalkingPedestrian
            ? config.pedestrian_intent_mix
            : config.parked_intent_mix;
    std::vector<int> members;
    for (int i = 0; i < config.num_scenarios; ++i) {
      if (family_of[i] == static_cast<int>(f)) members.push_back(i);
    }
    const std::vector<Intent> intents = Keys(mix);
    const std::vector<int> pick =
        QuotaAssignment(Weights(mix), static_cast<int>(members.size()), assign_rng);
    for (size_t m = 0; m < members.size(); ++m) {
      intent_of[members[m]] = intents[pick[m]];
    }
  }

  std::vector<Scenario> out;
  out.reserve(config.num_scenarios);
  for (int i = 0; i < config.num_scenarios; ++i) {
    out.push_back(
        BuildScenario(config, families[family_of[i]], intent_of[i], i, seed));
  }
  return out;
}

}  // namespace semcast
