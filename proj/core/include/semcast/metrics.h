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

// Trajectory metrics (minADE, minFDE, miss rate, mAP, soft-mAP), standard
// errors, and the analysis helpers used by the experiment harness.

#ifndef SEMCAST_METRICS_H_
#define SEMCAST_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semcast/predictor.h"
#include "semcast/scene_model.h"

namespace semcast {

enum class MetricProfile { kWomd, kNusc };

std::string_view ToString(MetricProfile p);
MetricProfile MetricProfileFromString(std::string_view s);

struct MetricsConfig {
  MetricProfile profile = MetricProfile::kWomd;
  int k = 6;
  double step_hz = 10.0;
  // WOMD profile: metrics evaluated at these horizons and averaged.
  std::vector<double> cut_points_s = {3.0, 5.0, 8.0};
  // WOMD miss thresholds in the ground-truth heading frame. Values at 3 s,
  // scaled linearly in time up to `threshold_scale_at_8s` times at 8 s.
  double lateral_threshold_m = 1.0;
  double longitudinal_threshold_m = 2.0;
  double threshold_scale_at_8s = 2.0;
  // nuScenes profile: final-displacement miss threshold.
  double nusc_miss_threshold_m = 2.0;
  // Motion buckets.
  double stationary_displacement_m = 2.0;
  double straight_deg = 15.0;
  double turn_deg = 45.0;
  double uturn_deg = 135.0;
  // mAP standard error by bootstrap over agents.
  int bootstrap_resamples = 200;
  uint64_t bootstrap_seed = 17;

  static MetricsConfig Womd() { return {}; }
  static MetricsConfig Nusc(int k);
  // Future-step indices (1-based) evaluated by the profile for `future_len`.
  // Throws ConfigError if a cut point lies beyond the horizon.
  std::vector<int> EvalSteps(int future_len) const;
  // (lateral, longitudinal) thresholds at future step `step`.
  std::pair<double, double> MissThresholds(int step) const;
};

struct GroundTruth {
  std::string scenario_id;
  std::string agent_id;
  Mat future;                // T' x 2, world frame
  Eigen::VectorXd heading;   // T'
  Eigen::VectorXd mask;      // T'
  Eigen::Vector2d position_t0 = Eigen::Vector2d::Zero();
  double heading_t0 = 0.0;
};

GroundTruth GroundTruthFor(const Scenario& scenario, const std::string& agent_id);

enum class MotionBucket {
  kStationary,
  kStraight,
  kStraightLeft,
  kStraightRight,
  kLeft,
  kRight,
  kUTurn,
};
inline constexpr int kNumBuckets = 7;

std::string_view ToString(MotionBucket b);
MotionBucket ClassifyMotion(const GroundTruth& gt, const MetricsConfig& config);

// Indices of the top-k modes by probability (stable for ties).
std::vector<int> TopK(const std::vector<ForecastMode>& modes, int k);

// Profile-averaged values for one agent.
double MinAde(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
              const MetricsConfig& config);
double MinFde(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
              const MetricsConfig& config);
// Values at a single future step (1-based) over steps 1..step.
double MinAdeAt(const std::vector<ForecastMode>& modes, const GroundTruth& gt, int k, int step);
double MinFdeAt(const std::vector<ForecastMode>& modes, const GroundTruth& gt, int k, int step);

// Whether `mode` misses `gt` at future step `step` under the profile rule.
bool IsMiss(const ForecastMode& mode, const GroundTruth& gt, int step,
            const MetricsConfig& config);
// Per-agent miss indicator averaged over the profile's evaluation steps.
double AgentMiss(const std::vector<ForecastMode>& modes, const GroundTruth& gt,
                 const MetricsConfig& config);
double MissRate(const std::vector<Forecast>& forecasts, const std::vector<GroundTruth>& gts,
                const MetricsConfig& config);

// Ranked detection list for one bucket and evaluation step.
struct ScoredMode {
  double score = 0.0;
  int agent = 0;
  bool match = false;
};
// Average precision with interpolated precision over the ranked list. Only
// the first match of an agent is a true positive; `soft` skips repeated
// matches instead of counting them as false positives. Within tied scores,
// false positives rank first.
double AveragePrecision(std::vector<ScoredMode> entries, int num_positives, bool soft);

struct MapResult {
  std::optional<double> map;
  std::optional<double> soft_map;
  std::map<MotionBucket, double> bucket_ap;  // averaged over evaluation steps
};
MapResult MapScores(const std::vector<Forecast>& forecasts, const std::vector<GroundTruth>& gts,
                    const MetricsConfig& config);

// Sample standard deviation over sqrt(n). Throws std::invalid_argument for n < 2.
double StandardError(const std::vector<double>& values);

struct MetricValue {
  double value = 0.0;
  double std_err = 0.0;
};

struct HorizonRow {
  double seconds = 0.0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
};

struct BucketRow {
  int count = 0;
  double min_ade = 0.0;
  std::optional<double> ap;
};

struct MetricsReport {
  std::string label;
  int num_agents = 0;
  int k = 0;
  std::string profile;
  MetricValue min_ade;
  MetricValue min_fde;
  MetricValue miss_rate;
  std::optional<MetricValue> map;
  std::optional<MetricValue> soft_map;
  std::vector<HorizonRow> per_horizon;
  std::map<std::string, BucketRow> per_bucket;
  std::string config_hash;
  std::string split_fingerprint;
  // Per-agent minADE keyed by "scenario_id/agent_id".
  std::map<std::string, double> per_agent_min_ade;
};

// forecasts[i] belongs to gts[i]. Invalid forecasts are skipped.
MetricsReport Evaluate(const std::vector<Forecast>& forecasts,
                       const std::vector<GroundTruth>& gts, const MetricsConfig& config);

// Mean per-agent minADE for each scenario in the report.
std::map<std::string, double> PerScenarioMinAde(const MetricsReport& report);

// Top ceil(fraction * N) scenario ids by baseline minADE; ties by id.
std::set<std::string> HardestSplit(const std::map<std::string, double>& baseline_min_ade,
                                   double fraction = 0.1);

// Semantic features keyed by the step they were computed at.
using SemanticsByStep = std::map<int, SemanticInputs>;
// Features from step t0 - round(delay_s * hz); empty (gate-off) if absent.
SemanticInputs LatencyShift(const SemanticsByStep& semantics, int t0, double step_hz,
                            double delay_s);

std::string ReportToJson(const MetricsReport& report);
MetricsReport ReportFromJson(const std::string& text);
void SaveReportCsv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path);
// Table with minADE, minFDE, Miss Rate, mAP, soft-mAP columns and a Std. Err.
// row under each method.
std::string ReportMarkdown(const std::vector<MetricsReport>& reports);

}  // namespace semcast

#endif  // SEMCAST_METRICS_H_
