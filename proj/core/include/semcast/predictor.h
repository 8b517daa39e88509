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

// Agent-centric transformer forecaster with optional semantic inputs. Each
// agent token and the pooled scene feature can receive a gated semantic
// embedding: f' = f + alpha * z with z = x W and alpha = tanh(mlp(z)).

#ifndef SEMCAST_PREDICTOR_H_
#define SEMCAST_PREDICTOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semcast/autograd.h"
#include "semcast/nn.h"
#include "semcast/scene_model.h"

namespace semcast {

enum class GainMode { kAdded, kConstant, kLearned };

std::string_view ToString(GainMode m);
// Accepts "added" (alias "none"), "constant", "learned".
GainMode GainModeFromString(std::string_view s);

struct PredictorConfig {
  int d_model = 128;  // also the semantic embedding width
  int num_heads = 4;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int d_ff = 1024;
  int head_hidden = 1024;
  int num_modes = 6;
  int gain_hidden = 32;
  int map_points = 8;
  int history_len = 10;
  int future_len = 80;
  // Meters per unit of network output for trajectory means and features.
  double position_scale = 10.0;
  bool use_semantics = true;
  GainMode gain_mode = GainMode::kLearned;

  void Validate() const;
  bool operator==(const PredictorConfig&) const = default;
};

inline constexpr double kSigmaFloor = 1e-3;
inline constexpr int kAgentFeaturesPerStep = 7;  // x, y, vx, vy, cos h, sin h, valid

// Multi-hot semantic features for one forecasting call. Missing entries mean
// zero vectors (gate off).
struct SemanticInputs {
  std::map<std::string, Eigen::VectorXd> agents;  // agent_id -> x_i (58)
  std::optional<Eigen::VectorXd> scene;            // x_S (19)
};

// Model-ready tensors for one (scenario, target agent) pair, expressed in the
// target's frame at t0.
struct PreparedSample {
  std::string scenario_id;
  std::string target_id;
  int target_row = 0;
  std::vector<std::string> token_agents;
  Mat agent_features;  // n_agents x (7 t0 + 3)
  Mat map_features;    // n_map x (2 P + 7)
  Mat agent_semantics; // n_agents x 58
  Mat scene_semantics; // 1 x 19
  Mat gt;              // T' x 2, target frame, meters
  Eigen::VectorXd gt_mask;  // T', 1 for valid future steps
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double yaw = 0.0;

  bool has_future() const { return gt_mask.sum() > 0.0; }
};

// Throws DataError when the target is unknown or invalid at t0, or when the
// scenario timing does not match the config.
PreparedSample PrepareSample(const Scenario& scenario, const std::string& target_id,
                             const SemanticInputs* semantics, const PredictorConfig& config);

struct ForecastMode {
  double probability = 0.0;
  Mat mean;   // T' x 2, world frame
  Mat sigma;  // T' x 2, along the target's t0 heading axes

  Eigen::Vector2d endpoint() const { return mean.row(mean.rows() - 1).transpose(); }
};

struct Forecast {
  std::string scenario_id;
  std::string agent_id;
  bool valid = true;
  std::vector<ForecastMode> modes;       // network order
  std::vector<ForecastMode> aggregated;  // filled by Aggregate
  std::vector<double> agent_alphas;      // per token agent; empty without semantics
  double target_alpha = 0.0;
  double scene_alpha = 0.0;
};

// Greedy aggregation: modes in descending probability; a mode whose endpoint
// lies within threshold_m of an already selected representative is absorbed
// into the first such representative (probability added); otherwise it
// becomes a representative while fewer than k_out exist. Probabilities are
// renormalized over the kept mass.
std::vector<ForecastMode> Aggregate(const std::vector<ForecastMode>& modes, int k_out,
                                    double threshold_m);

// Plain-matrix versions of the semantic path.
// z = x^T W  (x: D, W: D x d)
Eigen::RowVectorXd EmbedSemantics(const Eigen::VectorXd& x, const Mat& w);
struct GateParams {
  GainMode mode = GainMode::kLearned;
  Mat w1;  // d x h   (learned)
  Mat w2;  // h x 1   (learned)
  double c = 0.0;  // constant mode pre-activation
};
double GateAlpha(const Eigen::RowVectorXd& z, const GateParams& gate);
// f' = f + alpha(z) z
Eigen::RowVectorXd GatedAugment(const Eigen::RowVectorXd& f, const Eigen::RowVectorXd& z,
                                const GateParams& gate, double* alpha = nullptr);

// Mixture loss for one target. Mode k* minimizes mean displacement to the
// valid ground-truth steps; loss = -log p_k* + sum_t NLL_t(k*).
struct GmmLossParts {
  int best_mode = 0;
  double classification = 0.0;
  double regression = 0.0;
  double total() const { return classification + regression; }
};
// logits: M x 1; gaussian: M x 4T' laid out per step as (mu_x, mu_y, sigma_x,
// sigma_y) with sigmas already positive; gt: T' x 2.
GmmLossParts GmmLossValue(const Mat& logits, const Mat& gaussian, const Mat& gt,
                          const Eigen::VectorXd& mask);

struct ShapeEntry {
  std::string name;
  int rows = 0;
  int cols = 0;
  bool semantic = false;  // part of the semantic additions
};

class Predictor {
 public:
  Predictor(PredictorConfig config, uint64_t seed);

  const PredictorConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  struct Outputs {
    Var logits;    // M x 1
    Var gaussian;  // M x 4T' (means in meters, sigmas positive)
    Var agent_alpha;  // n_agents x 1; invalid without semantics
    Var scene_alpha;  // 1 x 1; invalid without semantics
  };
  Outputs Build(Graph& g, const PreparedSample& sample) const;
  // Scalar loss node (GMM loss with analytic local gradient).
  Var Loss(Graph& g, const Outputs& out, const PreparedSample& sample,
           GmmLossParts* parts = nullptr) const;

  Forecast Predict(const PreparedSample& sample) const;
  Forecast Forward(const Scenario& scenario, const std::string& target_id,
                   const SemanticInputs* semantics = nullptr) const;

  std::vector<ShapeEntry> ShapeManifest() const;
  int64_t NumParams() const { return params_.NumScalars(); }
  int64_t NumSemanticParams() const;

  void SaveCheckpoint(const std::filesystem::path& path,
                      const std::string& config_hash = "") const;
  static Predictor LoadCheckpoint(const std::filesystem::path& path);

 private:
  PredictorConfig config_;
  ParamSet params_;
  Mlp2 agent_encoder_;
  Mlp2 map_encoder_;
  std::vector<SelfAttentionBlock> encoder_;
  Parameter* queries_ = nullptr;
  std::vector<CrossAttentionBlock> decoder_;
  LayerNormLayer head_norm_;
  Mlp2 head_;
  // Semantic additions.
  Parameter* emb_agent_ = nullptr;
  Parameter* emb_scene_ = nullptr;
  Mlp2 gain_agent_;
  Mlp2 gain_scene_;
  Parameter* const_agent_ = nullptr;
  Parameter* const_scene_ = nullptr;

  Var Gate(Graph& g, Var z, bool scene) const;
};

int AgentFeatureDim(const PredictorConfig& c);
int MapFeatureDim(const PredictorConfig& c);

}  // namespace semcast

#endif  // SEMCAST_PREDICTOR_H_
