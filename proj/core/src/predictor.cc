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

#include "semcast/predictor.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "semcast/common.h"
#include "semcast/semantic_schema.h"

namespace semcast {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kCheckpointVersion = 1;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double SoftplusValue(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Matrix2d Rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Points spaced evenly by arc length along `polyline`.
std::vector<Eigen::Vector2d> Resample(const std::vector<Eigen::Vector2d>& polyline, int n) {
  std::vector<double> cum(polyline.size(), 0.0);
  for (size_t i = 1; i < polyline.size(); ++i) {
    cum[i] = cum[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  }
  std::vector<Eigen::Vector2d> out;
  const double total = cum.back();
  size_t seg = 1;
  for (int k = 0; k < n; ++k) {
    const double s = n == 1 ? 0.0 : total * k / (n - 1);
    while (seg + 1 < polyline.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(polyline[seg - 1] + t * (polyline[seg] - polyline[seg - 1]));
  }
  return out;
}

int CategoryIndex(AgentCategory c) {
  switch (c) {
    case AgentCategory::kVehicle:
      return 0;
    case AgentCategory::kPedestrian:
      return 1;
    case AgentCategory::kOther:
      break;
  }
  return 2;
}

// Means and sigmas scaled to meters; sigmas through softplus plus the floor.
Var GaussianHead(Graph& g, Var raw, double scale) {
  Mat out = g.value(raw);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const bool sigma = (j % 4) >= 2;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, j) = sigma ? SoftplusValue(out(i, j)) * scale + kSigmaFloor : out(i, j) * scale;
    }
  }
  return g.Emit(std::move(out), {raw.id}, [raw, scale](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    const Mat& R = g.value(raw);
    Mat& dr = g.mutable_grad(raw.id);
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
      const bool sigma = (j % 4) >= 2;
      for (Eigen::Index i = 0; i < R.rows(); ++i) {
        dr(i, j) += G(i, j) * (sigma ? Sigmoid(R(i, j)) * scale : scale);
      }
    }
  });
}

int BestMode(const Mat& gaussian, const Mat& gt, const Eigen::VectorXd& mask) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const Eigen::Index steps = gt.rows();
  for (Eigen::Index k = 0; k < gaussian.rows(); ++k) {
    double d = 0.0;
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (mask(t) <= 0.0) continue;
      d += std::hypot(gaussian(k, 4 * t) - gt(t, 0), gaussian(k, 4 * t + 1) - gt(t, 1));
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

Json ConfigToJson(const PredictorConfig& c) {
  Json j;
  j["d_model"] = c.d_model;
  j["num_heads"] = c.num_heads;
  j["encoder_layers"] = c.encoder_layers;
  j["decoder_layers"] = c.decoder_layers;
  j["d_ff"] = c.d_ff;
  j["head_hidden"] = c.head_hidden;
  j["num_modes"] = c.num_modes;
  j["gain_hidden"] = c.gain_hidden;
  j["map_points"] = c.map_points;
  j["history_len"] = c.history_len;
  j["future_len"] = c.future_len;
  j["position_scale"] = c.position_scale;
  j["use_semantics"] = c.use_semantics;
  j["gain_mode"] = ToString(c.gain_mode);
  return j;
}

PredictorConfig ConfigFromJson(const Json& j) {
  PredictorConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.encoder_layers = j.at("encoder_layers").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.num_modes = j.at("num_modes").get<int>();
  c.gain_hidden = j.at("gain_hidden").get<int>();
  c.map_points = j.at("map_points").get<int>();
  c.history_len = j.at("history_len").get<int>();
  c.future_len = j.at("future_len").get<int>();
  c.position_scale = j.at("position_scale").get<double>();
  c.use_semantics = j.at("use_semantics").get<bool>();
  c.gain_mode = GainModeFromString(j.at("gain_mode").get<std::string>());
  return c;
}

}  // namespace

std::string_view ToString(GainMode m) {
  switch (m) {
    case GainMode::kAdded:
      return "added";
    case GainMode::kConstant:
      return "constant";
    case GainMode::kLearned:
      break;
  }
  return "learned";
}

GainMode GainModeFromString(std::string_view s) {
  if (s == "added" || s == "none") return GainMode::kAdded;
  if (s == "constant") return GainMode::kConstant;
  if (s == "learned") return GainMode::kLearned;
  throw ConfigError("unknown gain mode '" + std::string(s) +
                    "' (expected added|none, constant, learned)");
}

void PredictorConfig::Validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(d_model, "d_model");
  positive(num_heads, "num_heads");
  positive(d_ff, "d_ff");
  positive(head_hidden, "head_hidden");
  positive(num_modes, "num_modes");
  positive(gain_hidden, "gain_hidden");
  positive(history_len, "history_len");
  positive(future_len, "future_len");
  if (encoder_layers < 0 || decoder_layers < 0) {
    throw ConfigError("layer counts must be >= 0");
  }
  if (map_points < 2) throw ConfigError("map_points must be >= 2");
  if (d_model % num_heads != 0) throw ConfigError("d_model must be divisible by num_heads");
  if (!(position_scale > 0.0)) throw ConfigError("position_scale must be positive");
}

int AgentFeatureDim(const PredictorConfig& c) {
  return kAgentFeaturesPerStep * c.history_len + 3;
}

int MapFeatureDim(const PredictorConfig& c) { return 2 * c.map_points + 3 + 4; }

PreparedSample PrepareSample(const Scenario& scenario, const std::string& target_id,
                             const SemanticInputs* semantics, const PredictorConfig& config) {
  const int t0 = scenario.history_len;
  if (t0 != config.history_len || scenario.future_len() != config.future_len) {
    throw DataError("scenario '" + scenario.scenario_id + "' has " + std::to_string(t0) +
                    "/" + std::to_string(scenario.future_len()) +
                    " history/future steps; the model expects " +
                    std::to_string(config.history_len) + "/" +
                    std::to_string(config.future_len));
  }
  const AgentTrack* target = scenario.FindAgent(target_id);
  if (target == nullptr) {
    throw DataError("scenario '" + scenario.scenario_id + "' has no agent '" + target_id + "'");
  }
  const AgentState& anchor = target->at(t0);
  if (!anchor.valid) {
    throw DataError("target '" + target_id + "' in '" + scenario.scenario_id +
                    "' is not valid at t0");
  }

  PreparedSample s;
  s.scenario_id = scenario.scenario_id;
  s.target_id = target_id;
  s.origin = anchor.position();
  s.yaw = anchor.heading;
  const Eigen::Matrix2d to_local = Rotation(-s.yaw);
  const double scale = config.position_scale;

  std::vector<const AgentTrack*> tokens;
  for (const AgentTrack& a : scenario.agents) {
    bool any = false;
    for (int step = 1; step <= t0 && !any; ++step) any = a.at(step).valid;
    if (any) tokens.push_back(&a);
  }
  s.agent_features = Mat::Zero(static_cast<Eigen::Index>(tokens.size()), AgentFeatureDim(config));
  s.agent_semantics = Mat::Zero(static_cast<Eigen::Index>(tokens.size()), kAgentDim);
  for (size_t r = 0; r < tokens.size(); ++r) {
    const AgentTrack& a = *tokens[r];
    s.token_agents.push_back(a.agent_id);
    if (a.agent_id == target_id) s.target_row = static_cast<int>(r);
    for (int step = 1; step <= t0; ++step) {
      const AgentState& st = a.at(step);
      if (!st.valid) continue;  // masked: the whole step stays zero
      const Eigen::Vector2d p = to_local * (st.position() - s.origin) / scale;
      const Eigen::Vector2d v = to_local * Eigen::Vector2d(st.vx, st.vy) / scale;
      const double h = st.heading - s.yaw;
      const int c0 = kAgentFeaturesPerStep * (step - 1);
      s.agent_features.row(r).segment(c0, kAgentFeaturesPerStep)
          << p.x(), p.y(), v.x(), v.y(), std::cos(h), std::sin(h), 1.0;
    }
    s.agent_features(r, kAgentFeaturesPerStep * t0 + CategoryIndex(a.category)) = 1.0;
    if (semantics != nullptr) {
      const auto it = semantics->agents.find(a.agent_id);
      if (it != semantics->agents.end()) {
        if (it->second.size() != kAgentDim) {
          throw std::invalid_argument("agent semantic vector must have dimension 58");
        }
        s.agent_semantics.row(r) = it->second.transpose();
      }
    }
  }

  std::map<std::string, LightState> lights;
  for (const TrafficLightState& l : scenario.traffic_lights) {
    if (l.step == t0) lights[l.element_id] = l.state;
  }
  const int p = config.map_points;
  s.map_features = Mat::Zero(static_cast<Eigen::Index>(scenario.map_elements.size()),
                             MapFeatureDim(config));
  for (size_t r = 0; r < scenario.map_elements.size(); ++r) {
    const MapElement& m = scenario.map_elements[r];
    const std::vector<Eigen::Vector2d> pts = Resample(m.polyline, p);
    for (int k = 0; k < p; ++k) {
      const Eigen::Vector2d q = to_local * (pts[k] - s.origin) / scale;
      s.map_features(r, 2 * k) = q.x();
      s.map_features(r, 2 * k + 1) = q.y();
    }
    s.map_features(r, 2 * p + static_cast<int>(m.kind)) = 1.0;
    if (const auto it = lights.find(m.element_id); it != lights.end()) {
      s.map_features(r, 2 * p + 3 + static_cast<int>(it->second)) = 1.0;
    }
  }

  s.scene_semantics = Mat::Zero(1, kSceneDim);
  if (semantics != nullptr && semantics->scene) {
    if (semantics->scene->size() != kSceneDim) {
      throw std::invalid_argument("scene semantic vector must have dimension 19");
    }
    s.scene_semantics.row(0) = semantics->scene->transpose();
  }

  const int tf = config.future_len;
  s.gt = Mat::Zero(tf, 2);
  s.gt_mask = Eigen::VectorXd::Zero(tf);
  for (int k = 0; k < tf; ++k) {
    const int step = t0 + 1 + k;
    if (step > static_cast<int>(target->states.size())) break;
    const AgentState& st = target->at(step);
    if (!st.valid) continue;
    s.gt.row(k) = (to_local * (st.position() - s.origin)).transpose();
    s.gt_mask(k) = 1.0;
  }
  return s;
}

std::vector<ForecastMode> Aggregate(const std::vector<ForecastMode>& modes, int k_out,
                                    double threshold_m) {
  if (k_out <= 0) throw std::invalid_argument("Aggregate: k_out must be positive");
  std::vector<size_t> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return modes[a].probability > modes[b].probability;
  });
  std::vector<ForecastMode> reps;
  for (size_t idx : order) {
    const ForecastMode& m = modes[idx];
    bool absorbed = false;
    for (ForecastMode& r : reps) {
      if ((r.endpoint() - m.endpoint()).norm() <= threshold_m) {
        r.probability += m.probability;
        absorbed = true;
        break;
      }
    }
    if (!absorbed && static_cast<int>(reps.size()) < k_out) reps.push_back(m);
  }
  double total = 0.0;
  for (const ForecastMode& r : reps) total += r.probability;
  if (total > 0.0) {
    for (ForecastMode& r : reps) r.probability /= total;
  }
  return reps;
}

Eigen::RowVectorXd EmbedSemantics(const Eigen::VectorXd& x, const Mat& w) {
  if (x.size() != w.rows()) throw std::invalid_argument("EmbedSemantics: shape mismatch");
  return x.transpose() * w;
}

double GateAlpha(const Eigen::RowVectorXd& z, const GateParams& gate) {
  switch (gate.mode) {
    case GainMode::kAdded:
      return 1.0;
    case GainMode::kConstant:
      return std::tanh(gate.c);
    case GainMode::kLearned:
      break;
  }
  if (z.size() != gate.w1.rows() || gate.w2.rows() != gate.w1.cols() || gate.w2.cols() != 1) {
    throw std::invalid_argument("GateAlpha: shape mismatch");
  }
  const Eigen::RowVectorXd h = (z * gate.w1).cwiseMax(0.0);
  return std::tanh((h * gate.w2)(0, 0));
}

Eigen::RowVectorXd GatedAugment(const Eigen::RowVectorXd& f, const Eigen::RowVectorXd& z,
                                const GateParams& gate, double* alpha) {
  if (f.size() != z.size()) throw std::invalid_argument("GatedAugment: shape mismatch");
  const double a = GateAlpha(z, gate);
  if (alpha != nullptr) *alpha = a;
  return f + a * z;
}

GmmLossParts GmmLossValue(const Mat& logits, const Mat& gaussian, const Mat& gt,
                          const Eigen::VectorXd& mask) {
  GmmLossParts parts;
  parts.best_mode = BestMode(gaussian, gt, mask);
  const int k = parts.best_mode;
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  parts.classification = lse - logits(k, 0);
  for (Eigen::Index t = 0; t < gt.rows(); ++t) {
    if (mask(t) <= 0.0) continue;
    const double sx = gaussian(k, 4 * t + 2), sy = gaussian(k, 4 * t + 3);
    const double dx = (gt(t, 0) - gaussian(k, 4 * t)) / sx;
    const double dy = (gt(t, 1) - gaussian(k, 4 * t + 1)) / sy;
    parts.regression += kLog2Pi + std::log(sx) + std::log(sy) + 0.5 * (dx * dx + dy * dy);
  }
  return parts;
}

Predictor::Predictor(PredictorConfig config, uint64_t seed) : config_(config) {
  config_.Validate();
  Rng rng(seed);
  const int d = config_.d_model;
  agent_encoder_ = Mlp2(params_, "agent_enc", AgentFeatureDim(config_), d, d, true, rng);
  map_encoder_ = Mlp2(params_, "map_enc", MapFeatureDim(config_), d, d, true, rng);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    encoder_.emplace_back(params_, "enc" + std::to_string(l), d, config_.num_heads,
                          config_.d_ff, rng);
  }
  queries_ = &params_.AddGlorot("dec/queries", config_.num_modes, d, rng);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    decoder_.emplace_back(params_, "dec" + std::to_string(l), d, config_.num_heads,
                          config_.d_ff, rng);
  }
  head_norm_ = LayerNormLayer(params_, "head/ln", d);
  head_ = Mlp2(params_, "head/mlp", d, config_.head_hidden, 1 + 4 * config_.future_len, true,
               rng);
  if (config_.use_semantics) {
    emb_agent_ = &params_.AddGlorot("sem/emb_agent", kAgentDim, d, rng);
    emb_scene_ = &params_.AddGlorot("sem/emb_scene", kSceneDim, d, rng);
    if (config_.gain_mode == GainMode::kLearned) {
      gain_agent_ = Mlp2(params_, "sem/gain_agent", d, config_.gain_hidden, 1, false, rng);
      gain_scene_ = Mlp2(params_, "sem/gain_scene", d, config_.gain_hidden, 1, false, rng);
    } else if (config_.gain_mode == GainMode::kConstant) {
      const_agent_ = &params_.AddConstant("sem/const_agent", 1, 1, 0.5);
      const_scene_ = &params_.AddConstant("sem/const_scene", 1, 1, 0.5);
    }
  }
}

Var Predictor::Gate(Graph& g, Var z, bool scene) const {
  const Eigen::Index n = g.value(z).rows();
  switch (config_.gain_mode) {
    case GainMode::kAdded:
      return g.Constant(Mat::Ones(n, 1));
    case GainMode::kConstant: {
      const Var a = Tanh(g, g.Param(scene ? *const_scene_ : *const_agent_));
      return n == 1 ? a : MatMul(g, g.Constant(Mat::Ones(n, 1)), a);
    }
    case GainMode::kLearned:
      break;
  }
  return Tanh(g, (scene ? gain_scene_ : gain_agent_)(g, z));
}

Predictor::Outputs Predictor::Build(Graph& g, const PreparedSample& s) const {
  const int d = config_.d_model;
  Outputs out;
  Var agents = agent_encoder_(g, g.Constant(s.agent_features));
  if (config_.use_semantics) {
    const Var z = MatMul(g, g.Constant(s.agent_semantics), g.Param(*emb_agent_));
    out.agent_alpha = Gate(g, z, false);
    const Var spread = MatMul(g, out.agent_alpha, g.Constant(Mat::Ones(1, d)));
    agents = Add(g, agents, Mul(g, z, spread));
  }
  Var x = ConcatRows(g, {agents, map_encoder_(g, g.Constant(s.map_features))});
  for (const SelfAttentionBlock& block : encoder_) x = block(g, x);

  Var scene = MeanRows(g, x);
  if (config_.use_semantics) {
    const Var z = MatMul(g, g.Constant(s.scene_semantics), g.Param(*emb_scene_));
    out.scene_alpha = Gate(g, z, true);
    scene = Add(g, scene, ScaleBy(g, z, out.scene_alpha));
  }
  const Var context = Add(g, SliceRows(g, x, s.target_row, 1), scene);
  Var q = AddRowBroadcast(g, g.Param(*queries_), context);
  for (const CrossAttentionBlock& block : decoder_) q = block(g, q, x);

  const Var h = head_(g, head_norm_(g, q));
  out.logits = SliceCols(g, h, 0, 1);
  out.gaussian = GaussianHead(g, SliceCols(g, h, 1, 4 * config_.future_len),
                              config_.position_scale);
  return out;
}

Var Predictor::Loss(Graph& g, const Outputs& o, const PreparedSample& s,
                    GmmLossParts* parts_out) const {
  const GmmLossParts parts = GmmLossValue(g.value(o.logits), g.value(o.gaussian), s.gt,
                                          s.gt_mask);
  if (parts_out != nullptr) *parts_out = parts;
  Mat value(1, 1);
  value(0, 0) = parts.total();
  const Var logits = o.logits, gaussian = o.gaussian;
  const int k = parts.best_mode;
  const Mat gt = s.gt;
  const Eigen::VectorXd mask = s.gt_mask;
  return g.Emit(std::move(value), {logits.id, gaussian.id},
                [logits, gaussian, k, gt, mask](Graph& g, int self) {
                  const double up = g.grad(Var{self})(0, 0);
                  const Mat& L = g.value(logits);
                  if (g.needs_grad(logits.id)) {
                    Mat p = (L.array() - L.maxCoeff()).exp().matrix();
                    p /= p.sum();
                    p(k, 0) -= 1.0;
                    g.mutable_grad(logits.id) += up * p;
                  }
                  if (!g.needs_grad(gaussian.id)) return;
                  const Mat& G = g.value(gaussian);
                  Mat& dg = g.mutable_grad(gaussian.id);
                  for (Eigen::Index t = 0; t < gt.rows(); ++t) {
                    if (mask(t) <= 0.0) continue;
                    for (int c = 0; c < 2; ++c) {
                      const double mu = G(k, 4 * t + c);
                      const double sd = G(k, 4 * t + 2 + c);
                      const double r = gt(t, c) - mu;
                      dg(k, 4 * t + c) += up * (-r / (sd * sd));
                      dg(k, 4 * t + 2 + c) += up * (1.0 / sd - r * r / (sd * sd * sd));
                    }
                  }
                });
}

Forecast Predictor::Predict(const PreparedSample& s) const {
  Graph g(/*record=*/false);
  const Outputs o = Build(g, s);
  const Mat& logits = g.value(o.logits);
  const Mat& gauss = g.value(o.gaussian);
  Eigen::VectorXd p = (logits.col(0).array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  const Eigen::Matrix2d to_world = Rotation(s.yaw);
  Forecast f;
  f.scenario_id = s.scenario_id;
  f.agent_id = s.target_id;
  const int tf = config_.future_len;
  for (int k = 0; k < config_.num_modes; ++k) {
    ForecastMode m;
    m.probability = p(k);
    m.mean.resize(tf, 2);
    m.sigma.resize(tf, 2);
    for (int t = 0; t < tf; ++t) {
      const Eigen::Vector2d local(gauss(k, 4 * t), gauss(k, 4 * t + 1));
      m.mean.row(t) = (s.origin + to_world * local).transpose();
      m.sigma(t, 0) = gauss(k, 4 * t + 2);
      m.sigma(t, 1) = gauss(k, 4 * t + 3);
    }
    f.modes.push_back(std::move(m));
  }
  if (o.agent_alpha.valid()) {
    const Mat& a = g.value(o.agent_alpha);
    f.agent_alphas.assign(a.data(), a.data() + a.size());
    f.target_alpha = a(s.target_row, 0);
    f.scene_alpha = g.value(o.scene_alpha)(0, 0);
  }
  return f;
}

Forecast Predictor::Forward(const Scenario& scenario, const std::string& target_id,
                            const SemanticInputs* semantics) const {
  return Predict(PrepareSample(scenario, target_id, semantics, config_));
}

std::vector<ShapeEntry> Predictor::ShapeManifest() const {
  std::vector<ShapeEntry> out;
  for (const Parameter* p : params_.all()) {
    out.push_back({p->name, static_cast<int>(p->value.rows()),
                   static_cast<int>(p->value.cols()), p->name.rfind("sem/", 0) == 0});
  }
  return out;
}

int64_t Predictor::NumSemanticParams() const {
  int64_t n = 0;
  for (const Parameter* p : params_.WithPrefix("sem/")) n += p->value.size();
  return n;
}

void Predictor::SaveCheckpoint(const std::filesystem::path& path,
                               const std::string& config_hash) const {
  Json j;
  j["format"] = "semcast-checkpoint";
  j["version"] = kCheckpointVersion;
  j["schema_fingerprint"] = SchemaFingerprint();
  j["config_hash"] = config_hash;
  j["config"] = ConfigToJson(config_);
  Json tensors = Json::array();
  for (const Parameter* p : params_.all()) {
    Json t;
    t["name"] = p->name;
    t["shape"] = {p->value.rows(), p->value.cols()};
    std::vector<double> data(p->value.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data.data(), p->value.rows(), p->value.cols()) = p->value;
    t["data"] = std::move(data);
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os << j.dump() << '\n';
  if (!os) throw DataError("write failed for checkpoint " + path.string());
}

Predictor Predictor::LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read checkpoint " + path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "semcast-checkpoint" || j.at("version") != kCheckpointVersion) {
      throw DataError("checkpoint " + path.string() + " has an unsupported format");
    }
    if (j.at("schema_fingerprint") != SchemaFingerprint()) {
      throw DataError("checkpoint " + path.string() +
                      " was trained with a different semantic schema");
    }
    Predictor model(ConfigFromJson(j.at("config")), 0);
    const Json& tensors = j.at("tensors");
    if (tensors.size() != model.params_.size()) {
      throw DataError("checkpoint " + path.string() + " tensor count does not match its config");
    }
    for (const Json& t : tensors) {
      Parameter& p = model.params_.at(t.at("name").get<std::string>());
      const int rows = t.at("shape").at(0).get<int>(), cols = t.at("shape").at(1).get<int>();
      const std::vector<double> data = t.at("data").get<std::vector<double>>();
      if (rows != p.value.rows() || cols != p.value.cols() ||
          data.size() != static_cast<size_t>(rows) * cols) {
        throw DataError("checkpoint tensor " + p.name + " has the wrong shape");
      }
      p.value = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(data.data(), rows, cols);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path.string() + " is malformed: " + e.what());
  } catch (const std::out_of_range& e) {
    throw DataError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace semcast
