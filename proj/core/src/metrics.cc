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

#include "semcast/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "semcast/common.h"

namespace semcast {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double Displacement(const ForecastMode& m, const GroundTruth& gt, int step) {
  return (m.mean.row(step - 1) - gt.future.row(step - 1)).norm();
}

void CheckAligned(const std::vector<Forecast>& forecasts, const std::vector<GroundTruth>& gts) {
  if (forecasts.size() != gts.size()) {
    throw std::invalid_argument("forecasts and ground truths differ in count");
  }
}

Json MetricToJson(const MetricValue& v) { return {{"value", v.value}, {"std_err", v.std_err}}; }
MetricValue MetricFromJson(const Json& j) {
  return {j.at("value").get<double>(), j.at("std_err").get<double>()};
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view ToString(MetricProfile p) { return p == MetricProfile::kWomd ? "womd" : "nusc"; }

MetricProfile MetricProfileFromString(std::string_view s) {
  if (s == "womd") return MetricProfile::kWomd;
  if (s == "nusc") return MetricProfile::kNusc;
  throw ConfigError("unknown metric profile '" + std::string(s) + "' (expected womd or nusc)");
}

MetricsConfig MetricsConfig::Nusc(int k) {
  MetricsConfig c;
  c.profile = MetricProfile::kNusc;
  c.k = k;
  c.step_hz = 2.0;
  return c;
}

std::vector<int> MetricsConfig::EvalSteps(int future_len) const {
  if (profile == MetricProfile::kNusc) return {future_len};
  std::vector<int> steps;
  for (double c : cut_points_s) {
    const int n = static_cast<int>(std::lround(c * step_hz));
    if (n < 1 || n > future_len) {
      throw ConfigError("cut point " + Fixed(c, 1) + " s lies beyond the " +
                        std::to_string(future_len) + "-step horizon");
    }
    steps.push_back(n);
  }
  return steps;
}

std::pair<double, double> MetricsConfig::MissThresholds(int step) const {
  const double t = step / step_hz;
  const double frac = std::clamp((t - 3.0) / 5.0, 0.0, 1.0);
  const double scale = 1.0 + (threshold_scale_at_8s - 1.0) * frac;
  return {lateral_threshold_m * scale, longitudinal_threshold_m * scale};
}

GroundTruth GroundTruthFor(const Scenario& scenario, const std::string& agent_id) {
  const AgentTrack* a = scenario.FindAgent(agent_id);
  if (a == nullptr) {
    throw DataError("scenario '" + scenario.scenario_id + "' has no agent '" + agent_id + "'");
  }
  const int t0 = scenario.history_len;
  const int tf = scenario.future_len();
  GroundTruth gt;
  gt.scenario_id = scenario.scenario_id;
  gt.agent_id = agent_id;
  gt.position_t0 = a->at(t0).position();
  gt.heading_t0 = a->at(t0).heading;
  gt.future = Mat::Zero(tf, 2);
  gt.heading = Eigen::VectorXd::Zero(tf);
  gt.mask = Eigen::VectorXd::Zero(tf);
  for (int k = 0; k < tf; ++k) {
    const int step = t0 + 1 + k;
    if (step > static_cast<int>(a->states.size())) break;
    const AgentState& s = a->at(step);
    if (!s.valid) continue;
    gt.future.row(k) = s.position().transpose();
    gt.heading(k) = s.heading;
    gt.mask(k) = 1.0;
  }
  return gt;
}

std::string_view ToString(MotionBucket b) {
  switch (b) {
    case MotionBucket::kStationary:
      return "stationary";
    case MotionBucket::kStraight:
      return "straight";
    case MotionBucket::kStraightLeft:
      return "straight_left";
    case MotionBucket::kStraightRight:
      return "straight_right";
    case MotionBucket::kLeft:
      return "left";
    case MotionBucket::kRight:
      return "right";
    case MotionBucket::kUTurn:
      break;
  }
  return "u_turn";
}

MotionBucket ClassifyMotion(const GroundTruth& gt, const MetricsConfig& c) {
  int last = -1;
  for (Eigen::Index t = gt.mask.size() - 1; t >= 0; --t) {
    if (gt.mask(t) > 0.0) {
      last = static_cast<int>(t);
      break;
    }
  }
  if (last < 0) throw DataError("agent '" + gt.agent_id + "' has no valid future");
  const double disp = (gt.future.row(last).transpose() - gt.position_t0).norm();
  if (disp < c.stationary_displacement_m) return MotionBucket::kStationary;
  const double dh = NormalizeHeading(gt.heading(last) - gt.heading_t0) * kRadToDeg;
  const double a = std::abs(dh);
  if (a > c.uturn_deg) return MotionBucket::kUTurn;
  if (a > c.turn_deg) return dh > 0 ? MotionBucket::kLeft : MotionBucket::kRight;
  if (a >= c.straight_deg) return dh > 0 ? MotionBucket::kStraightLeft : MotionBucket::kStraightRight;
  return MotionBucket::kStraight;
}

std::vector<int> TopK(const std::vector<ForecastMode>& modes, int k) {
  std::vector<int> idx(modes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return modes[a].probability > modes[b].probability;
  });
  if (k < static_cast<int>(idx.size())) idx.resize(std::max(k, 0));
  return idx;
}

double MinAdeAt(const std::vector<ForecastMode>& modes, const GroundTruth& gt, int k, int step) {
  if (static_cast<int>(modes.size()) < k) throw std::invalid_argument("fewer modes than K");
  double best = std::numeric_limits<double>::infinity();
  for (int m : TopK(modes, k)) {
    double sum = 0.0;
    int n = 0;
    for (int t = 1; t <= step; ++t) {
      if (gt.mask(t - 1) <= 0.0) continue;
      sum += Displacement(modes[m], gt, t);
      ++n;
    }
    if (n == 0) throw DataError("agent '" + gt.agent_id + "' has no valid future up to step " +
                                std::to_string(step));
    best = std::min(best, sum / n);
  }
  return best;
}

double MinFdeAt(const std::vector<ForecastMode>& modes, const GroundTruth& gt, int k, int step) {
  if (static_cast<int>(modes.size()) < k) throw std::invalid_argument("fewer modes than K");
  if (gt.mask(step - 1) <= 0.0) {
    throw DataError("agent '" + gt.agent_id + "' is not valid at future step " +
                    std::to_string(step));
  }
  double best = std::numeric_limits<double>::infinity();
  for (int m : TopK(modes, k)) best = std::min(best, Displacement(modes[m], gt, step));
  return best;
}

double MinAde(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
              const MetricsConfig& config) {
  const std::vector<int> steps = config.EvalSteps(static_cast<int>(gt.mask.size()));
  double sum = 0.0;
  for (int s : steps) sum += MinAdeAt(modes, gt, config.k, s);
  return sum / steps.size();
}

double MinFde(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
              const MetricsConfig& config) {
  const std::vector<int> steps = config.EvalSteps(static_cast<int>(gt.mask.size()));
  double sum = 0.0;
  for (int s : steps) sum += MinFdeAt(modes, gt, config.k, s);
  return sum / steps.size();
}

bool IsMiss(const ForecastMode& mode, const GroundTruth& gt, int step,
            const MetricsConfig& config) {
  const Eigen::Vector2d d = (mode.mean.row(step - 1) - gt.future.row(step - 1)).transpose();
  if (config.profile == MetricProfile::kNusc) return d.norm() > config.nusc_miss_threshold_m;
  const double h = gt.heading(step - 1);
  const double lon = d.x() * std::cos(h) + d.y() * std::sin(h);
  const double lat = -d.x() * std::sin(h) + d.y() * std::cos(h);
  const auto [lat_thr, lon_thr] = config.MissThresholds(step);
  return std::abs(lat) > lat_thr || std::abs(lon) > lon_thr;
}

double AgentMiss(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
                 const MetricsConfig& config) {
  const std::vector<int> steps = config.EvalSteps(static_cast<int>(gt.mask.size()));
  const std::vector<int> top = TopK(modes, config.k);
  double misses = 0.0;
  for (int s : steps) {
    if (gt.mask(s - 1) <= 0.0) {
      throw DataError("agent '" + gt.agent_id + "' is not valid at future step " +
                      std::to_string(s));
    }
    bool hit = false;
    for (int m : top) hit = hit || !IsMiss(modes[m], gt, s, config);
    if (!hit) misses += 1.0;
  }
  return misses / steps.size();
}

double MissRate(const std::vector<Forecast>& forecasts, const std::vector<GroundTruth>& gts,
                const MetricsConfig& config) {
  CheckAligned(forecasts, gts);
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < forecasts.size(); ++i) {
    if (!forecasts[i].valid) continue;
    sum += AgentMiss(forecasts[i].modes, gts[i], config);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

double AveragePrecision(std::vector<ScoredMode> entries, int num_positives, bool soft) {
  if (num_positives <= 0) return 0.0;
  std::sort(entries.begin(), entries.end(),
            [](const ScoredMode& a, const ScoredMode& b) { return a.score > b.score; });
  // Within a group of tied scores, false positives (non-matches and repeated
  // matches of an agent) rank ahead of true positives, so the result does not
  // depend on input order.
  std::vector<double> precision, recall;
  std::set<int> matched;
  int tp = 0, fp = 0;
  auto point = [&] {
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / num_positives);
  };
  for (size_t lo = 0; lo < entries.size();) {
    size_t hi = lo;
    while (hi < entries.size() && entries[hi].score == entries[lo].score) ++hi;
    int group_fp = 0;
    std::set<int> group_tp;
    for (size_t i = lo; i < hi; ++i) {
      const ScoredMode& e = entries[i];
      if (!e.match) {
        ++group_fp;
      } else if (matched.count(e.agent) || !group_tp.insert(e.agent).second) {
        if (!soft) ++group_fp;
      }
    }
    for (int i = 0; i < group_fp; ++i) {
      ++fp;
      point();
    }
    for (int agent : group_tp) {
      matched.insert(agent);
      ++tp;
      point();
    }
    lo = hi;
  }
  // Interpolate: precision at recall r is the best precision at any r' >= r.
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0, prev_recall = 0.0;
  for (size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

MapResult MapScores(const std::vector<Forecast>& forecasts, const std::vector<GroundTruth>& gts,
                    const MetricsConfig& config) {
  CheckAligned(forecasts, gts);
  MapResult result;
  std::vector<int> agents;
  for (size_t i = 0; i < forecasts.size(); ++i) {
    if (forecasts[i].valid) agents.push_back(static_cast<int>(i));
  }
  if (agents.empty()) return result;
  std::vector<MotionBucket> bucket_of(forecasts.size(), MotionBucket::kStationary);
  for (int i : agents) bucket_of[i] = ClassifyMotion(gts[i], config);
  const std::vector<int> steps = config.EvalSteps(static_cast<int>(gts[agents[0]].mask.size()));

  double map_sum = 0.0, soft_sum = 0.0;
  std::map<MotionBucket, double> bucket_sum;
  int used_steps = 0;
  for (int s : steps) {
    double step_map = 0.0, step_soft = 0.0;
    int nonempty = 0;
    for (int b = 0; b < kNumBuckets; ++b) {
      const MotionBucket bucket = static_cast<MotionBucket>(b);
      std::vector<ScoredMode> entries;
      int positives = 0;
      for (int i : agents) {
        if (bucket_of[i] != bucket) continue;
        ++positives;
        for (int m : TopK(forecasts[i].modes, config.k)) {
          entries.push_back({forecasts[i].modes[m].probability, i,
                             !IsMiss(forecasts[i].modes[m], gts[i], s, config)});
        }
      }
      if (positives == 0) continue;
      const double ap = AveragePrecision(entries, positives, false);
      step_map += ap;
      step_soft += AveragePrecision(entries, positives, true);
      bucket_sum[bucket] += ap;
      ++nonempty;
    }
    if (nonempty == 0) continue;
    map_sum += step_map / nonempty;
    soft_sum += step_soft / nonempty;
    ++used_steps;
  }
  if (used_steps > 0) {
    result.map = map_sum / used_steps;
    result.soft_map = soft_sum / used_steps;
    for (const auto& [b, v] : bucket_sum) result.bucket_ap[b] = v / used_steps;
  }
  return result;
}

double StandardError(const std::vector<double>& values) {
  const size_t n = values.size();
  if (n < 2) throw std::invalid_argument("standard error needs at least two values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

MetricsReport Evaluate(const std::vector<Forecast>& forecasts,
                       const std::vector<GroundTruth>& gts, const MetricsConfig& config) {
  CheckAligned(forecasts, gts);
  MetricsReport r;
  r.k = config.k;
  r.profile = ToString(config.profile);
  std::vector<int> agents;
  for (size_t i = 0; i < forecasts.size(); ++i) {
    if (forecasts[i].valid) agents.push_back(static_cast<int>(i));
  }
  r.num_agents = static_cast<int>(agents.size());
  if (agents.empty()) return r;

  auto summarize = [](const std::vector<double>& v) {
    MetricValue m;
    m.value = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    m.std_err = v.size() >= 2 ? StandardError(v) : 0.0;
    return m;
  };
  std::vector<double> ade, fde, miss;
  for (int i : agents) {
    ade.push_back(MinAde(forecasts[i].modes, gts[i], config));
    fde.push_back(MinFde(forecasts[i].modes, gts[i], config));
    miss.push_back(AgentMiss(forecasts[i].modes, gts[i], config));
    r.per_agent_min_ade[gts[i].scenario_id + "/" + gts[i].agent_id] = ade.back();
  }
  r.min_ade = summarize(ade);
  r.min_fde = summarize(fde);
  r.miss_rate = summarize(miss);

  const std::vector<int> steps = config.EvalSteps(static_cast<int>(gts[agents[0]].mask.size()));
  for (int s : steps) {
    HorizonRow h;
    h.seconds = s / config.step_hz;
    for (int i : agents) {
      h.min_ade += MinAdeAt(forecasts[i].modes, gts[i], config.k, s);
      h.min_fde += MinFdeAt(forecasts[i].modes, gts[i], config.k, s);
      bool hit = false;
      for (int m : TopK(forecasts[i].modes, config.k)) {
        hit = hit || !IsMiss(forecasts[i].modes[m], gts[i], s, config);
      }
      h.miss_rate += hit ? 0.0 : 1.0;
    }
    h.min_ade /= agents.size();
    h.min_fde /= agents.size();
    h.miss_rate /= agents.size();
    r.per_horizon.push_back(h);
  }

  const MapResult maps = MapScores(forecasts, gts, config);
  for (size_t j = 0; j < agents.size(); ++j) {
    BucketRow& row = r.per_bucket[std::string(ToString(ClassifyMotion(gts[agents[j]], config)))];
    ++row.count;
    row.min_ade += ade[j];
  }
  for (auto& [name, row] : r.per_bucket) row.min_ade /= row.count;
  for (const auto& [b, ap] : maps.bucket_ap) r.per_bucket[std::string(ToString(b))].ap = ap;

  if (maps.map) {
    // Bootstrap over agents for the ranking metrics.
    std::vector<double> boot_map, boot_soft;
    Rng rng(config.bootstrap_seed);
    for (int b = 0; b < config.bootstrap_resamples; ++b) {
      std::vector<Forecast> fs;
      std::vector<GroundTruth> gs;
      for (size_t j = 0; j < agents.size(); ++j) {
        const int pick = agents[rng.UniformInt(0, static_cast<int>(agents.size()) - 1)];
        fs.push_back(forecasts[pick]);
        gs.push_back(gts[pick]);
      }
      const MapResult m = MapScores(fs, gs, config);
      if (m.map) {
        boot_map.push_back(*m.map);
        boot_soft.push_back(*m.soft_map);
      }
    }
    // The bootstrap SE is the spread of the resampled estimates themselves.
    auto spread = [](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      return StandardError(v) * std::sqrt(static_cast<double>(v.size()));
    };
    r.map = MetricValue{*maps.map, spread(boot_map)};
    r.soft_map = MetricValue{*maps.soft_map, spread(boot_soft)};
  }
  return r;
}

std::map<std::string, double> PerScenarioMinAde(const MetricsReport& report) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& [key, v] : report.per_agent_min_ade) {
    auto& [sum, n] = acc[key.substr(0, key.rfind('/'))];
    sum += v;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, p] : acc) out[id] = p.first / p.second;
  return out;
}

std::set<std::string> HardestSplit(const std::map<std::string, double>& baseline_min_ade,
                                   double fraction) {
  if (baseline_min_ade.empty()) throw std::invalid_argument("hardest split of an empty set");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in (0, 1]");
  }
  std::vector<std::pair<std::string, double>> v(baseline_min_ade.begin(), baseline_min_ade.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const size_t n = static_cast<size_t>(std::ceil(fraction * v.size() - 1e-9));
  std::set<std::string> out;
  for (size_t i = 0; i < std::max<size_t>(1, n) && i < v.size(); ++i) out.insert(v[i].first);
  return out;
}

SemanticInputs LatencyShift(const SemanticsByStep& semantics, int t0, double step_hz,
                            double delay_s) {
  if (!(delay_s >= 0.0)) throw std::invalid_argument("delay must be non-negative");
  const int step = t0 - static_cast<int>(std::lround(delay_s * step_hz));
  const auto it = semantics.find(step);
  return it == semantics.end() ? SemanticInputs{} : it->second;
}

std::string ReportToJson(const MetricsReport& r) {
  Json j;
  j["label"] = r.label;
  j["num_agents"] = r.num_agents;
  j["k"] = r.k;
  j["profile"] = r.profile;
  j["min_ade"] = MetricToJson(r.min_ade);
  j["min_fde"] = MetricToJson(r.min_fde);
  j["miss_rate"] = MetricToJson(r.miss_rate);
  j["map"] = r.map ? MetricToJson(*r.map) : Json(nullptr);
  j["soft_map"] = r.soft_map ? MetricToJson(*r.soft_map) : Json(nullptr);
  Json horizons = Json::array();
  for (const HorizonRow& h : r.per_horizon) {
    horizons.push_back({{"seconds", h.seconds},
                        {"min_ade", h.min_ade},
                        {"min_fde", h.min_fde},
                        {"miss_rate", h.miss_rate}});
  }
  j["per_horizon"] = std::move(horizons);
  Json buckets = Json::object();
  for (const auto& [name, b] : r.per_bucket) {
    buckets[name] = {{"count", b.count},
                     {"min_ade", b.min_ade},
                     {"ap", b.ap ? Json(*b.ap) : Json(nullptr)}};
  }
  j["per_bucket"] = std::move(buckets);
  j["config_hash"] = r.config_hash;
  j["split_fingerprint"] = r.split_fingerprint;
  j["per_agent_min_ade"] = r.per_agent_min_ade;
  return j.dump(2);
}

MetricsReport ReportFromJson(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    MetricsReport r;
    r.label = j.at("label").get<std::string>();
    r.num_agents = j.at("num_agents").get<int>();
    r.k = j.at("k").get<int>();
    r.profile = j.at("profile").get<std::string>();
    r.min_ade = MetricFromJson(j.at("min_ade"));
    r.min_fde = MetricFromJson(j.at("min_fde"));
    r.miss_rate = MetricFromJson(j.at("miss_rate"));
    if (!j.at("map").is_null()) r.map = MetricFromJson(j.at("map"));
    if (!j.at("soft_map").is_null()) r.soft_map = MetricFromJson(j.at("soft_map"));
    for (const Json& h : j.at("per_horizon")) {
      r.per_horizon.push_back({h.at("seconds").get<double>(), h.at("min_ade").get<double>(),
                               h.at("min_fde").get<double>(), h.at("miss_rate").get<double>()});
    }
    for (const auto& [name, b] : j.at("per_bucket").items()) {
      BucketRow row;
      row.count = b.at("count").get<int>();
      row.min_ade = b.at("min_ade").get<double>();
      if (!b.at("ap").is_null()) row.ap = b.at("ap").get<double>();
      r.per_bucket[name] = row;
    }
    r.config_hash = j.at("config_hash").get<std::string>();
    r.split_fingerprint = j.at("split_fingerprint").get<std::string>();
    r.per_agent_min_ade = j.at("per_agent_min_ade").get<std::map<std::string, double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

void SaveReportCsv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "label,num_agents,k,profile,min_ade,min_ade_se,min_fde,min_fde_se,miss_rate,"
        "miss_rate_se,map,map_se,soft_map,soft_map_se,config_hash,split_fingerprint\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  for (const MetricsReport& r : reports) {
    os << r.label << ',' << r.num_agents << ',' << r.k << ',' << r.profile << ','
       << num(r.min_ade.value) << ',' << num(r.min_ade.std_err) << ','
       << num(r.min_fde.value) << ',' << num(r.min_fde.std_err) << ','
       << num(r.miss_rate.value) << ',' << num(r.miss_rate.std_err) << ','
       << (r.map ? num(r.map->value) : "") << ',' << (r.map ? num(r.map->std_err) : "") << ','
       << (r.soft_map ? num(r.soft_map->value) : "") << ','
       << (r.soft_map ? num(r.soft_map->std_err) : "") << ',' << r.config_hash << ','
       << r.split_fingerprint << '\n';
  }
}

std::string ReportMarkdown(const std::vector<MetricsReport>& reports) {
  std::string out =
      "| Method | minADE ↓ | minFDE ↓ | Miss Rate ↓ | mAP ↑ | soft-mAP ↑ |\n"
      "|---|---|---|---|---|---|\n";
  for (const MetricsReport& r : reports) {
    auto opt = [](const std::optional<MetricValue>& v, bool se) {
      return v ? Fixed(se ? v->std_err : v->value) : std::string("—");
    };
    out += "| " + r.label + " | " + Fixed(r.min_ade.value) + " | " + Fixed(r.min_fde.value) +
           " | " + Fixed(r.miss_rate.value) + " | " + opt(r.map, false) + " | " +
           opt(r.soft_map, false) + " |\n";
    out += "| Std. Err. | " + Fixed(r.min_ade.std_err) + " | " + Fixed(r.min_fde.std_err) +
           " | " + Fixed(r.miss_rate.std_err) + " | " + opt(r.map, true) + " | " +
           opt(r.soft_map, true) + " |\n";
  }
  return out;
}

}  // namespace semcast
