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
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "grad_check.h"
#include "model_fixtures.h"
#include "semcast/common.h"
#include "semcast/semantic_schema.h"
#include "test_util.h"

namespace semcast {
namespace {

using testing::CheckGradients;
using testing::RandomSample;
using testing::ReadFile;
using testing::TempDir;
using testing::TinyConfig;
using testing::ToyScenarios;

Mat RandomMat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal(0.0, scale);
  return m;
}

GateParams RandomGate(Rng& rng, int d, int h) {
  GateParams g;
  g.mode = GainMode::kLearned;
  g.w1 = RandomMat(rng, d, h);
  g.w2 = RandomMat(rng, h, 1);
  return g;
}

TEST(GainModeTest, Parsing) {
  EXPECT_EQ(GainModeFromString("none"), GainMode::kAdded);
  EXPECT_EQ(GainModeFromString("added"), GainMode::kAdded);
  EXPECT_EQ(GainModeFromString("constant"), GainMode::kConstant);
  EXPECT_EQ(GainModeFromString("learned"), GainMode::kLearned);
  EXPECT_EQ(ToString(GainMode::kLearned), "learned");
  EXPECT_ANY_THROW(GainModeFromString("sometimes"));
}

TEST(PredictorConfigTest, Validation) {
  PredictorConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.d_model = 30;
  c.num_heads = 4;  // 30 is not divisible by 4
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.num_modes = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(EmbedSemanticsTest, IsLinear) {
  Rng rng(1);
  const Mat w = RandomMat(rng, kAgentDim, 16);
  const Eigen::VectorXd x1 = RandomMat(rng, kAgentDim, 1), x2 = RandomMat(rng, kAgentDim, 1);
  const Eigen::RowVectorXd lhs = EmbedSemantics(2.0 * x1 - 3.0 * x2, w);
  const Eigen::RowVectorXd rhs = 2.0 * EmbedSemantics(x1, w) - 3.0 * EmbedSemantics(x2, w);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(EmbedSemantics(Eigen::VectorXd::Zero(kAgentDim), w),
            Eigen::RowVectorXd::Zero(16));
  EXPECT_THROW(EmbedSemantics(Eigen::VectorXd::Zero(3), w), std::invalid_argument);
}

TEST(GateTest, ZeroEmbeddingIsBitwiseIdentity) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const GateParams gate = RandomGate(rng, 16, 8);
    const Eigen::RowVectorXd f = RandomMat(rng, 1, 16, 10.0);
    double alpha = -1.0;
    const Eigen::RowVectorXd out = GatedAugment(f, Eigen::RowVectorXd::Zero(16), gate, &alpha);
    EXPECT_EQ(alpha, 0.0);
    EXPECT_EQ(std::memcmp(out.data(), f.data(), sizeof(double) * 16), 0);
  }
}

TEST(GateTest, MatchesHandComputation) {
  GateParams gate;
  gate.w1 = Mat(2, 2);
  gate.w1 << 1.0, -1.0, 0.5, 2.0;
  gate.w2 = Mat(2, 1);
  gate.w2 << 0.3, -0.2;
  Eigen::RowVectorXd z(2), f(2);
  z << 1.0, 2.0;
  f << 10.0, 20.0;
  // h = relu([1 + 1, -1 + 4]) = [2, 3]; alpha = tanh(0.6 - 0.6) = 0.
  // Choose z = (2, 1): h = relu([2.5, 0]) = [2.5, 0]; alpha = tanh(0.75).
  z << 2.0, 1.0;
  double alpha = 0.0;
  const Eigen::RowVectorXd out = GatedAugment(f, z, gate, &alpha);
  EXPECT_DOUBLE_EQ(alpha, std::tanh(0.75));
  EXPECT_DOUBLE_EQ(out(0), 10.0 + std::tanh(0.75) * 2.0);
  EXPECT_DOUBLE_EQ(out(1), 20.0 + std::tanh(0.75) * 1.0);

  gate.mode = GainMode::kAdded;
  EXPECT_EQ(GatedAugment(f, z, gate), f + z);
  gate.mode = GainMode::kConstant;
  gate.c = 0.4;
  EXPECT_DOUBLE_EQ(GateAlpha(z, gate), std::tanh(0.4));
}

TEST(GateTest, AlphaStaysInsideUnitInterval) {
  Rng rng(4);
  double sum = 0.0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const GateParams gate = RandomGate(rng, 8, 4);
    const double a = GateAlpha(RandomMat(rng, 1, 8), gate);
    EXPECT_LE(std::abs(a), 1.0);
    sum += std::abs(a);
  }
  EXPECT_LT(sum / n, 1.0);
}

TEST(GmmLossTest, ClosedFormAtTheMean) {
  const int tf = 4, m = 3;
  Rng rng(5);
  const Mat gt = RandomMat(rng, tf, 2);
  Mat gaussian(m, 4 * tf);
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < tf; ++t) {
      gaussian(k, 4 * t) = gt(t, 0) + (k == 1 ? 0.0 : 3.0 + k);
      gaussian(k, 4 * t + 1) = gt(t, 1);
      gaussian(k, 4 * t + 2) = 1.0;
      gaussian(k, 4 * t + 3) = 1.0;
    }
  }
  const Mat logits = Mat::Zero(m, 1);
  const GmmLossParts p = GmmLossValue(logits, gaussian, gt, Eigen::VectorXd::Ones(tf));
  EXPECT_EQ(p.best_mode, 1);
  EXPECT_NEAR(p.classification, std::log(3.0), 1e-12);
  EXPECT_NEAR(p.regression, tf * std::log(2.0 * std::numbers::pi), 1e-12);

  // Masked steps contribute nothing.
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(tf);
  mask(0) = 0.0;
  EXPECT_NEAR(GmmLossValue(logits, gaussian, gt, mask).regression,
              (tf - 1) * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(GmmLossTest, ScaledResidual) {
  Mat gt = Mat::Zero(1, 2);
  Mat gaussian(1, 4);
  gaussian << 2.0, -1.0, 2.0, 0.5;
  const GmmLossParts p = GmmLossValue(Mat::Zero(1, 1), gaussian, gt, Eigen::VectorXd::Ones(1));
  const double expected = std::log(2.0 * std::numbers::pi) + std::log(2.0) + std::log(0.5) +
                          0.5 * (1.0 + 4.0);
  EXPECT_NEAR(p.regression, expected, 1e-12);
  EXPECT_NEAR(p.classification, 0.0, 1e-12);
}

ForecastMode EndpointMode(double p, double x, double y) {
  ForecastMode m;
  m.probability = p;
  m.mean = Mat(2, 2);
  m.mean << 0.0, 0.0, x, y;
  m.sigma = Mat::Ones(2, 2);
  return m;
}

// Independent greedy oracle over (probability, endpoint) pairs.
std::vector<std::pair<double, Eigen::Vector2d>> GreedyOracle(
    const std::vector<ForecastMode>& modes, int k_out, double thr) {
  std::vector<int> idx(modes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return modes[a].probability > modes[b].probability; });
  std::vector<std::pair<double, Eigen::Vector2d>> reps;
  for (int i : idx) {
    const Eigen::Vector2d e = modes[i].endpoint();
    auto it = std::find_if(reps.begin(), reps.end(),
                           [&](const auto& r) { return (r.second - e).norm() <= thr; });
    if (it != reps.end()) {
      it->first += modes[i].probability;
    } else if (static_cast<int>(reps.size()) < k_out) {
      reps.emplace_back(modes[i].probability, e);
    }
  }
  double total = 0.0;
  for (const auto& r : reps) total += r.first;
  for (auto& r : reps) r.first /= total;
  return reps;
}

TEST(AggregateTest, MatchesGreedyOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.UniformInt(1, 12);
    std::vector<ForecastMode> modes;
    for (int i = 0; i < n; ++i) {
      modes.push_back(EndpointMode(rng.Uniform(), rng.Uniform(-5, 5), rng.Uniform(-5, 5)));
    }
    const int k = rng.UniformInt(1, 6);
    const double thr = rng.Uniform(0.5, 4.0);
    const auto got = Aggregate(modes, k, thr);
    const auto want = GreedyOracle(modes, k, thr);
    ASSERT_EQ(got.size(), want.size());
    double total = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].probability, want[i].first, 1e-12);
      EXPECT_EQ(got[i].endpoint(), want[i].second);
      total += got[i].probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(AggregateTest, MergesNearbyEndpoints) {
  const std::vector<ForecastMode> modes = {EndpointMode(0.5, 0, 0), EndpointMode(0.3, 0.5, 0),
                                           EndpointMode(0.2, 10, 0)};
  const auto out = Aggregate(modes, 6, 1.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].probability, 0.8);
  EXPECT_DOUBLE_EQ(out[1].probability, 0.2);
  EXPECT_THROW(Aggregate(modes, 0, 1.0), std::invalid_argument);
}

TEST(PredictorTest, FullModelGradientsMatchFiniteDifferences) {
  for (GainMode gain : {GainMode::kLearned, GainMode::kConstant, GainMode::kAdded}) {
    Predictor model(TinyConfig(true, gain), 3);
    const PreparedSample s = RandomSample(model.config(), 3, 2, 8);
    const auto r = CheckGradients(model.params(), [&](Graph& g) {
      return model.Loss(g, model.Build(g, s), s);
    });
    EXPECT_LT(r.max_rel_error, 1e-4) << ToString(gain) << " worst " << r.worst;
    EXPECT_EQ(r.checked, model.NumParams());
  }
}

TEST(PredictorTest, ForwardIsDeterministic) {
  const Predictor a(TinyConfig(), 9), b(TinyConfig(), 9);
  const PreparedSample s = RandomSample(a.config(), 4, 3, 1);
  const Forecast fa = a.Predict(s), fb = b.Predict(s);
  ASSERT_EQ(fa.modes.size(), 2u);
  for (size_t k = 0; k < fa.modes.size(); ++k) {
    EXPECT_EQ(fa.modes[k].mean, fb.modes[k].mean);
    EXPECT_EQ(fa.modes[k].probability, fb.modes[k].probability);
  }
  EXPECT_EQ(fa.agent_alphas, fb.agent_alphas);
}

TEST(PredictorTest, OutputsAreWellFormed) {
  const Predictor model(TinyConfig(), 2);
  const Forecast f = model.Predict(RandomSample(model.config(), 3, 2, 4));
  double total = 0.0;
  for (const ForecastMode& m : f.modes) {
    total += m.probability;
    EXPECT_EQ(m.mean.rows(), 5);
    EXPECT_GE(m.sigma.minCoeff(), kSigmaFloor);
    EXPECT_TRUE(m.mean.allFinite());
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  ASSERT_EQ(f.agent_alphas.size(), 3u);
  for (double a : f.agent_alphas) EXPECT_LT(std::abs(a), 1.0);
  EXPECT_EQ(f.target_alpha, f.agent_alphas[0]);
}

TEST(PredictorTest, ZeroSemanticsMatchBaselineBitwise) {
  // Semantic tensors are registered after the base network, so both models
  // share identical base weights for one seed.
  const Predictor with(TinyConfig(true), 12), without(TinyConfig(false), 12);
  PreparedSample s = RandomSample(with.config(), 3, 2, 5);
  s.agent_semantics.setZero();
  s.scene_semantics.setZero();
  const Forecast a = with.Predict(s), b = without.Predict(s);
  for (size_t k = 0; k < a.modes.size(); ++k) {
    EXPECT_EQ(a.modes[k].mean, b.modes[k].mean);
    EXPECT_EQ(a.modes[k].sigma, b.modes[k].sigma);
    EXPECT_EQ(a.modes[k].probability, b.modes[k].probability);
  }
  for (double alpha : a.agent_alphas) EXPECT_EQ(alpha, 0.0);
  EXPECT_EQ(a.scene_alpha, 0.0);
  EXPECT_TRUE(b.agent_alphas.empty());
}

TEST(PredictorTest, SemanticsChangeTheForecast) {
  const Predictor model(TinyConfig(), 12);
  PreparedSample s = RandomSample(model.config(), 3, 2, 5);
  const Forecast with = model.Predict(s);
  s.agent_semantics.setZero();
  EXPECT_NE(model.Predict(s).modes[0].mean, with.modes[0].mean);
}

TEST(PredictorTest, ScenarioForwardAndMapPermutationInvariance) {
  const Scenario sc = ToyScenarios(1).front();
  PredictorConfig c = TinyConfig();
  c.history_len = sc.history_len;
  c.future_len = sc.future_len();
  const Predictor model(c, 5);
  const std::string target = sc.Targets().front();
  const Forecast f = model.Forward(sc, target);
  Scenario permuted = sc;
  std::reverse(permuted.map_elements.begin(), permuted.map_elements.end());
  const Forecast g = model.Forward(permuted, target);
  ASSERT_EQ(f.modes.size(), g.modes.size());
  for (size_t k = 0; k < f.modes.size(); ++k) {
    EXPECT_NEAR(f.modes[k].probability, g.modes[k].probability, 1e-6);
    EXPECT_LT((f.modes[k].mean - g.modes[k].mean).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(PredictorTest, AgentTokenPermutationInvariance) {
  const Predictor model(TinyConfig(), 5);
  const PreparedSample s = RandomSample(model.config(), 4, 3, 2);
  PreparedSample p = s;
  const std::vector<int> order = {2, 0, 3, 1};  // new row r holds old row order[r]
  for (int r = 0; r < 4; ++r) {
    p.agent_features.row(r) = s.agent_features.row(order[r]);
    p.agent_semantics.row(r) = s.agent_semantics.row(order[r]);
    p.token_agents[r] = s.token_agents[order[r]];
    if (order[r] == s.target_row) p.target_row = r;
  }
  const Forecast f = model.Predict(s), g = model.Predict(p);
  for (size_t k = 0; k < f.modes.size(); ++k) {
    EXPECT_NEAR(f.modes[k].probability, g.modes[k].probability, 1e-6);
    EXPECT_LT((f.modes[k].mean - g.modes[k].mean).cwiseAbs().maxCoeff(), 1e-6);
  }
  EXPECT_EQ(f.target_alpha, g.target_alpha);
}

TEST(PredictorTest, InvalidAgentStatesAreMasked) {
  const Scenario sc = ToyScenarios(1).front();
  PredictorConfig c = TinyConfig();
  c.history_len = sc.history_len;
  c.future_len = sc.future_len();
  const Predictor model(c, 5);
  const std::string target = sc.Targets().front();
  auto loss = [&](const Scenario& s) {
    const PreparedSample p = PrepareSample(s, target, nullptr, c);
    Graph g(false);
    return g.value(model.Loss(g, model.Build(g, p), p))(0, 0);
  };
  // Blank out some history steps of a non-target agent in both copies.
  Scenario base = sc;
  for (AgentTrack& a : base.agents) {
    if (a.agent_id == target) continue;
    a.states[0].valid = false;
    a.states[1].valid = false;
  }
  Scenario perturbed = base;
  int touched = 0;
  for (AgentTrack& a : perturbed.agents) {
    for (AgentState& st : a.states) {
      if (st.valid) continue;
      st.x += 123.0;
      st.y -= 45.0;
      st.heading += 1.0;
      ++touched;
    }
  }
  // An agent that is never valid in the history contributes no token.
  AgentTrack ghost = perturbed.agents.front();
  ghost.agent_id = "ghost";
  for (AgentState& st : ghost.states) st.valid = false;
  perturbed.agents.push_back(ghost);
  std::sort(perturbed.agents.begin(), perturbed.agents.end(),
            [](const AgentTrack& x, const AgentTrack& y) { return x.agent_id < y.agent_id; });
  ASSERT_GT(touched, 0);
  EXPECT_EQ(loss(base), loss(perturbed));
  EXPECT_NE(loss(base), loss(sc));
}

TEST(PrepareSampleTest, RejectsBadInputs) {
  const Scenario sc = ToyScenarios(1).front();
  PredictorConfig c = TinyConfig();
  EXPECT_THROW(PrepareSample(sc, sc.Targets().front(), nullptr, c), DataError);
  c.history_len = sc.history_len;
  c.future_len = sc.future_len();
  EXPECT_THROW(PrepareSample(sc, "nobody", nullptr, c), DataError);
  SemanticInputs bad;
  bad.agents[sc.Targets().front()] = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(PrepareSample(sc, sc.Targets().front(), &bad, c), std::invalid_argument);
  SemanticInputs ok;
  ok.scene = Eigen::VectorXd::Ones(kSceneDim);
  const PreparedSample s = PrepareSample(sc, sc.Targets().front(), &ok, c);
  EXPECT_EQ(s.scene_semantics.sum(), kSceneDim);
  EXPECT_EQ(s.token_agents[s.target_row], sc.Targets().front());
  // Target frame: the target sits at the origin facing +x at t0.
  const int c0 = kAgentFeaturesPerStep * (sc.history_len - 1);
  EXPECT_NEAR(s.agent_features(s.target_row, c0), 0.0, 1e-12);
  EXPECT_NEAR(s.agent_features(s.target_row, c0 + 4), 1.0, 1e-12);
}

TEST(CheckpointTest, RoundTripAndFingerprintRejection) {
  TempDir dir;
  Predictor model(TinyConfig(true, GainMode::kConstant), 21);
  model.params().at("sem/const_agent").value(0, 0) = 0.123;
  const auto path = dir / "model.json";
  model.SaveCheckpoint(path, "abc");
  const Predictor loaded = Predictor::LoadCheckpoint(path);
  EXPECT_EQ(loaded.config(), model.config());
  ASSERT_EQ(loaded.params().size(), model.params().size());
  const auto a = model.params().all();
  const auto b = loaded.params().all();
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
  const PreparedSample s = RandomSample(model.config(), 2, 2, 3);
  EXPECT_EQ(model.Predict(s).modes[0].mean, loaded.Predict(s).modes[0].mean);

  auto j = nlohmann::json::parse(ReadFile(path));
  EXPECT_EQ(j["config_hash"], "abc");
  j["schema_fingerprint"] = "0000000000000000";
  std::ofstream(dir / "foreign.json") << j.dump();
  EXPECT_THROW(Predictor::LoadCheckpoint(dir / "foreign.json"), DataError);
  std::ofstream(dir / "garbage.json") << "{";
  EXPECT_THROW(Predictor::LoadCheckpoint(dir / "garbage.json"), DataError);
  EXPECT_THROW(Predictor::LoadCheckpoint(dir / "missing.json"), DataError);
}

TEST(ShapeManifestTest, SemanticOverheadAtDefaultConfig) {
  const Predictor model(PredictorConfig{}, 1);
  int64_t total = 0, semantic = 0;
  for (const ShapeEntry& e : model.ShapeManifest()) {
    const int64_t n = static_cast<int64_t>(e.rows) * e.cols;
    total += n;
    if (e.semantic) semantic += n;
    EXPECT_EQ(e.semantic, e.name.rfind("sem/", 0) == 0);
  }
  EXPECT_EQ(total, model.NumParams());
  EXPECT_EQ(semantic, model.NumSemanticParams());
  // Embeddings D x d plus two bias-free d x h x 1 gain MLPs.
  const int d = 128, h = 32;
  EXPECT_EQ(semantic, int64_t{kAgentDim} * d + int64_t{kSceneDim} * d + 2 * (d * h + h));
  const Predictor baseline(PredictorConfig{.use_semantics = false}, 1);
  EXPECT_EQ(baseline.NumParams(), total - semantic);
  EXPECT_LT(static_cast<double>(semantic) / baseline.NumParams(), 0.01);
}

}  // namespace
}  // namespace semcast
