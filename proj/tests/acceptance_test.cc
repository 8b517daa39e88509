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

// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number (e.g. `acceptance_test 1 5`).

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grad_check.h"
#include "metrics_oracle.h"
#include "model_fixtures.h"
#include "semcast/common.h"
#include "semcast/metrics.h"
#include "semcast/mock_oracle.h"
#include "semcast/pipeline.h"
#include "semcast/predictor.h"
#include "semcast/prompt_builder.h"
#include "semcast/response_parser.h"
#include "semcast/trainer.h"
#include "test_util.h"

namespace semcast {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

void Note(const std::string& line) {
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

AgentCategory CategoryOf(PromptKind kind) {
  return kind == PromptKind::kVsaVehicle ? AgentCategory::kVehicle : AgentCategory::kPedestrian;
}

std::vector<std::string> Ids(size_t n) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("agent" + std::to_string(i));
  return ids;
}

// ---------------------------------------------------------------------------
// 1. Corpus exactness.

Outcome CorpusExactness() {
  const auto start = Clock::now();
  const auto expected = testing::CorpusExpectations();
  int files = 0, mismatches = 0;
  for (const auto& [file, spec] : expected.items()) {
    const std::string raw = testing::ReadFile(testing::CorpusDir() / file);
    const auto rows = spec.at("rows").get<std::vector<std::vector<std::string>>>();
    const PromptKind kind = PromptKindFromString(spec.at("kind").get<std::string>());
    bool ok = false;
    if (kind == PromptKind::kSc) {
      const ScParse p = ParseSc(raw);
      ok = p.report.status == ParseStatus::kFull && p.scene.answers == rows[0];
    } else {
      const VsaParse p = ParseVsa(raw, CategoryOf(kind), Ids(rows.size()));
      ok = p.report.status == ParseStatus::kFull && p.agents.size() == rows.size();
      for (size_t i = 0; ok && i < rows.size(); ++i) ok = p.agents[i].answers == rows[i];
    }
    ++files;
    if (!ok) {
      ++mismatches;
      Note("mismatch: " + file);
    }
  }
  const double secs = Seconds(start);
  return {files > 0 && mismatches == 0 && secs < 1.0,
          Format("%d files, %d mismatches, %.3f s (limit 1 s)", files, mismatches, secs)};
}

// ---------------------------------------------------------------------------
// 2. Parser totality under 1e5 mutations.

Outcome ParserTotality() {
  const auto expected = testing::CorpusExpectations();
  std::vector<std::pair<std::string, PromptKind>> corpus;
  for (const auto& [file, spec] : expected.items()) {
    corpus.emplace_back(testing::ReadFile(testing::CorpusDir() / file),
                        PromptKindFromString(spec.at("kind").get<std::string>()));
  }
  Rng rng(20240601);
  const int trials = 100000;
  long crashes = 0, bad_outcomes = 0, bad_defaults = 0, defaulted = 0, parsed = 0;
  auto check_field = [&](const FieldOutcome& f, const QuestionSpec& q, const std::string& a) {
    if (f.source == FieldSource::kDefaulted) {
      ++defaulted;
      if (a != q.default_answer) ++bad_defaults;
    } else if (f.source == FieldSource::kParsed) {
      ++parsed;
      if (q.IndexOf(a) < 0) ++bad_outcomes;
    } else {
      ++bad_outcomes;
    }
  };
  for (int t = 0; t < trials; ++t) {
    auto [text, kind] = corpus[rng.UniformInt(0, static_cast<int>(corpus.size()) - 1)];
    const int mutations = rng.UniformInt(1, 4);
    for (int m = 0; m < mutations; ++m) {
      const int op = rng.UniformInt(0, 2);
      if (op == 0 && !text.empty()) {  // byte flip
        text[rng.UniformInt(0, static_cast<int>(text.size()) - 1)] =
            static_cast<char>(rng.UniformInt(0, 255));
      } else if (op == 1) {  // truncation
        text.resize(rng.UniformInt(0, static_cast<int>(text.size())));
      } else {  // row drop
        const size_t a = text.find('\n', rng.UniformInt(0, static_cast<int>(text.size())));
        if (a != std::string::npos) {
          const size_t b = text.find('\n', a + 1);
          text.erase(a, b == std::string::npos ? std::string::npos : b - a);
        }
      }
    }
    try {
      if (kind == PromptKind::kSc) {
        const ScParse p = ParseSc(text);
        const auto& schema = SchemaFor(SchemaKind::kScene);
        if (p.report.fields.size() != schema.size()) ++bad_outcomes;
        for (size_t q = 0; q < schema.size() && q < p.report.fields.size(); ++q) {
          check_field(p.report.fields[q], schema[q], p.scene.answers[q]);
        }
      } else {
        const size_t n = static_cast<size_t>(rng.UniformInt(1, 3));
        const VsaParse p = ParseVsa(text, CategoryOf(kind), Ids(n));
        const auto& schema = SchemaFor(SchemaKindFor(CategoryOf(kind)));
        if (p.report.fields.size() != n * schema.size() || p.agents.size() != n) {
          ++bad_outcomes;
          continue;
        }
        for (size_t i = 0; i < n; ++i) {
          for (size_t q = 0; q < schema.size(); ++q) {
            check_field(p.report.fields[i * schema.size() + q], schema[q], p.agents[i].answers[q]);
          }
        }
      }
    } catch (...) {
      ++crashes;
    }
  }
  return {crashes == 0 && bad_outcomes == 0 && bad_defaults == 0,
          Format("%d mutations: %ld exceptions, %ld invalid outcomes, %ld defaults off-schema "
                 "(%ld parsed / %ld defaulted fields)",
                 trials, crashes, bad_outcomes, bad_defaults, parsed, defaulted)};
}

// ---------------------------------------------------------------------------
// 3. Gate identity.

Outcome GateIdentity() {
  Rng rng(31337);
  const int draws = 1000, d = 128, h = 32;
  int identity_failures = 0;
  double sum_alpha = 0.0;
  int alpha_count = 0;
  auto random = [&](int r, int c, double scale) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal(0.0, scale);
    return m;
  };
  for (int i = 0; i < draws; ++i) {
    GateParams gate;
    gate.mode = GainMode::kLearned;
    // Glorot-scale weights as used at initialization, widened to stress tanh.
    gate.w1 = random(d, h, rng.Uniform(0.05, 2.0));
    gate.w2 = random(h, 1, rng.Uniform(0.05, 2.0));
    const Eigen::RowVectorXd f = random(1, d, 10.0);
    double alpha = 1.0;
    const Eigen::RowVectorXd out = GatedAugment(f, Eigen::RowVectorXd::Zero(d), gate, &alpha);
    if (alpha != 0.0 || std::memcmp(out.data(), f.data(), sizeof(double) * d) != 0) {
      ++identity_failures;
    }
    const Eigen::RowVectorXd z = random(1, d, 1.0);
    sum_alpha += std::abs(GateAlpha(z, gate));
    ++alpha_count;
  }
  // The same identity through the full model: zero semantics leave every
  // output bit unchanged relative to the semantics-free network.
  int model_failures = 0;
  for (int i = 0; i < 20; ++i) {
    const Predictor with(testing::TinyConfig(true), 100 + i);
    const Predictor without(testing::TinyConfig(false), 100 + i);
    PreparedSample s = testing::RandomSample(with.config(), 3, 2, 200 + i);
    s.agent_semantics.setZero();
    s.scene_semantics.setZero();
    const Forecast a = with.Predict(s), b = without.Predict(s);
    for (size_t k = 0; k < a.modes.size(); ++k) {
      if (a.modes[k].mean != b.modes[k].mean || a.modes[k].sigma != b.modes[k].sigma ||
          a.modes[k].probability != b.modes[k].probability) {
        ++model_failures;
      }
    }
  }
  const double mean_alpha = sum_alpha / alpha_count;
  return {identity_failures == 0 && model_failures == 0 && mean_alpha < 1.0,
          Format("%d draws: %d identity failures, %d full-model mismatches, mean |alpha| = %.4f "
                 "(< 1 required)",
                 draws, identity_failures, model_failures, mean_alpha)};
}

// ---------------------------------------------------------------------------
// 4. Gradient correctness.

Outcome GradientCheck() {
  const auto start = Clock::now();
  Predictor model(testing::TinyConfig(true, GainMode::kLearned), 7);
  const PreparedSample s = testing::RandomSample(model.config(), 3, 2, 11);
  const auto r = testing::CheckGradients(
      model.params(), [&](Graph& g) { return model.Loss(g, model.Build(g, s), s); }, 1e-5,
      1e-3);
  const double secs = Seconds(start);
  return {r.max_rel_error < 1e-4 && secs < 60.0 && r.checked == model.NumParams(),
          Format("%d scalars in %zu tensors, max relative error %.3e at %s (limit 1e-4), %.1f s",
                 r.checked, model.params().size(), r.max_rel_error, r.worst.c_str(), secs)};
}

// ---------------------------------------------------------------------------
// 5. Metric oracles.

Outcome MetricOracles() {
  Rng rng(5150);
  const int instances = 500;
  double worst = 0.0;
  std::string worst_what = "-";
  auto track = [&](double got, double want, const char* what) {
    const double e = std::abs(got - want);
    if (e > worst) {
      worst = e;
      worst_what = what;
    }
  };
  int map_presence_mismatch = 0;
  for (int i = 0; i < instances; ++i) {
    const testing::MetricInstance inst = testing::RandomMetricInstance(rng);
    const MetricsConfig& c = inst.config;
    for (size_t a = 0; a < inst.gts.size(); ++a) {
      const auto& modes = inst.forecasts[a].modes;
      track(MinAde(modes, inst.gts[a], c), testing::OracleMinAde(modes, inst.gts[a], c),
            "minADE");
      track(MinFde(modes, inst.gts[a], c), testing::OracleMinFde(modes, inst.gts[a], c),
            "minFDE");
    }
    track(MissRate(inst.forecasts, inst.gts, c),
          testing::OracleMissRate(inst.forecasts, inst.gts, c), "miss rate");
    const MapResult m = MapScores(inst.forecasts, inst.gts, c);
    const auto [hard, soft] = testing::OracleMap(inst.forecasts, inst.gts, c);
    if (m.map.has_value() == std::isnan(hard)) {
      ++map_presence_mismatch;
    } else if (m.map) {
      track(*m.map, hard, "mAP");
      track(*m.soft_map, soft, "soft-mAP");
    }
    // Direct PR integration on a random ranked list.
    std::vector<ScoredMode> entries;
    const int agents = rng.UniformInt(1, 20);
    const int n = rng.UniformInt(0, 60);
    for (int e = 0; e < n; ++e) {
      entries.push_back({rng.UniformInt(0, 8) / 8.0, rng.UniformInt(0, agents - 1),
                         rng.Bernoulli(0.4)});
    }
    for (bool s : {false, true}) {
      track(AveragePrecision(entries, agents, s),
            testing::OracleAveragePrecision(entries, agents, s), "AP");
    }
  }
  double se_worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    std::vector<double> v(rng.UniformInt(2, 300));
    const double scale = std::pow(10.0, rng.Uniform(-2.0, 2.0));
    for (double& x : v) x = rng.Normal(rng.Uniform(-5, 5), scale);
    se_worst = std::max(se_worst, std::abs(StandardError(v) - testing::WelfordStandardError(v)));
  }
  return {worst <= 1e-9 && se_worst <= 1e-12 && map_presence_mismatch == 0,
          Format("%d instances: max |diff| %.2e (%s, limit 1e-9); standard error max |diff| "
                 "%.2e (limit 1e-12)",
                 instances, worst, worst_what.c_str(), se_worst)};
}

// ---------------------------------------------------------------------------
// Synthetic experiments (criteria 6-9).

constexpr int kTrainScenarios = 500;
constexpr int kEvalScenarios = 200;
constexpr int kSeeds = 5;

PredictorConfig ExperimentModel(const TimingProfile& timing, bool use_semantics) {
  PredictorConfig c;
  c.d_model = 32;
  c.num_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.d_ff = 64;
  c.head_hidden = 128;
  c.history_len = timing.history_len;
  c.future_len = timing.future_len;
  c.use_semantics = use_semantics;
  return c;
}

TrainConfig ExperimentTraining() {
  TrainConfig t;
  t.epochs = 60;
  t.batch_size = 16;
  t.learning_rate = 3e-3;
  return t;
}

struct Split {
  std::vector<Scenario> train, eval;
};

Split MakeSplit(uint64_t seed, const TimingProfile& timing) {
  GeneratorConfig g;
  g.timing = timing;
  g.num_scenarios = kTrainScenarios;
  g.id_prefix = "train";
  Split s;
  s.train = GenerateSynthetic(g, 100 + seed);
  g.num_scenarios = kEvalScenarios;
  g.id_prefix = "eval";
  s.eval = GenerateSynthetic(g, 900 + seed);
  return s;
}

struct Features {
  SemanticIndex train, eval;
};

Features Extract(const Split& split, const FaultProfile& faults,
                 const std::vector<double>& eval_delays) {
  MllmClient client(ClientConfig{}, std::make_unique<MockBackend>(faults), nullptr);
  return {ExtractSemantics(split.train, client, {0.0}),
          ExtractSemantics(split.eval, client, eval_delays)};
}

struct Evaluation {
  MetricsReport report;
  double mean_abs_alpha = 0.0;
};

Predictor TrainModel(const Split& split, const SemanticIndex* semantics,
                     const TimingProfile& timing, uint64_t seed) {
  const PredictorConfig c = ExperimentModel(timing, semantics != nullptr);
  Predictor model(c, seed);
  Train(model, PrepareSamples(split.train, semantics, {}, c), ExperimentTraining(), seed);
  return model;
}

Evaluation EvaluateModel(const Predictor& model, const Split& split,
                         const SemanticIndex* semantics, double delay_s = 0.0) {
  SampleOptions o;
  o.delay_s = delay_s;
  const auto samples = PrepareSamples(split.eval, semantics, o, model.config());
  const auto forecasts = PredictAll(model, samples);
  return {Evaluate(forecasts, GroundTruths(split.eval, samples), MetricsConfig{}),
          MeanAbsAlpha(forecasts)};
}

double Uplift(double baseline, double method) { return (baseline - method) / baseline; }

struct SeedRun {
  Evaluation baseline, pnf, noisy;
};

// Shared by criteria 6, 7 and 9.
struct PairedRuns {
  std::vector<SeedRun> seeds;
  double uplift_seconds = 0.0;
  bool with_noise = false;
};

PairedRuns& Runs(bool need_noise) {
  static PairedRuns runs;
  if (!runs.seeds.empty() && (runs.with_noise || !need_noise)) return runs;
  const TimingProfile timing = TimingProfile::WomdStyle();
  const bool fresh = runs.seeds.empty();
  if (fresh) {
    const auto start = Clock::now();
    for (int seed = 1; seed <= kSeeds; ++seed) {
      const Split split = MakeSplit(seed, timing);
      const Features clean = Extract(split, FaultProfile{}, {0.0});
      SeedRun r;
      r.baseline = EvaluateModel(TrainModel(split, nullptr, timing, seed), split, nullptr);
      r.pnf = EvaluateModel(TrainModel(split, &clean.train, timing, seed), split, &clean.eval);
      Note(Format("seed %d: baseline minADE %.4f, with semantics %.4f (uplift %+.2f%%, "
                  "mean |alpha| %.3f)",
                  seed, r.baseline.report.min_ade.value, r.pnf.report.min_ade.value,
                  100 * Uplift(r.baseline.report.min_ade.value, r.pnf.report.min_ade.value),
                  r.pnf.mean_abs_alpha));
      runs.seeds.push_back(r);
    }
    runs.uplift_seconds = Seconds(start);
  }
  if (need_noise && !runs.with_noise) {
    for (int seed = 1; seed <= kSeeds; ++seed) {
      const Split split = MakeSplit(seed, timing);
      FaultProfile faults;
      faults.p_wrong_answer = 0.5;
      faults.seed = static_cast<uint64_t>(seed);
      const Features noisy = Extract(split, faults, {0.0});
      SeedRun& r = runs.seeds[seed - 1];
      r.noisy = EvaluateModel(TrainModel(split, &noisy.train, timing, seed), split, &noisy.eval);
      Note(Format("seed %d: p_wrong_answer 0.5 minADE %.4f (vs baseline %+.2f%%, mean |alpha| "
                  "%.3f vs %.3f zero-fault)",
                  seed, r.noisy.report.min_ade.value,
                  100 * (r.noisy.report.min_ade.value / r.baseline.report.min_ade.value - 1.0),
                  r.noisy.mean_abs_alpha, r.pnf.mean_abs_alpha));
    }
    runs.with_noise = true;
  }
  return runs;
}

Outcome SyntheticUplift() {
  const PairedRuns& runs = Runs(false);
  int wins = 0;
  double mean = 0.0;
  for (const SeedRun& r : runs.seeds) {
    const double u = Uplift(r.baseline.report.min_ade.value, r.pnf.report.min_ade.value);
    wins += u > 0.0;
    mean += u / kSeeds;
  }
  const double minutes = runs.uplift_seconds / 60.0;
  return {wins >= 4 && mean >= 0.10 && minutes < 30.0,
          Format("%d train / %d eval scenarios: wins %d/%d (>= 4), mean uplift %.2f%% (>= 10%%), "
                 "%.1f min (< 30)",
                 kTrainScenarios, kEvalScenarios, wins, kSeeds, 100 * mean, minutes)};
}

Outcome HardestSplitAmplification() {
  const PairedRuns& runs = Runs(false);
  double hard_mean = 0.0, full_mean = 0.0;
  for (size_t i = 0; i < runs.seeds.size(); ++i) {
    const auto base = PerScenarioMinAde(runs.seeds[i].baseline.report);
    const auto pnf = PerScenarioMinAde(runs.seeds[i].pnf.report);
    const std::set<std::string> hardest = HardestSplit(base, 0.1);
    double hb = 0.0, hp = 0.0, fb = 0.0, fp = 0.0;
    for (const auto& [id, v] : base) {
      fb += v;
      fp += pnf.at(id);
      if (hardest.count(id)) {
        hb += v;
        hp += pnf.at(id);
      }
    }
    const double hard = Uplift(hb, hp), full = Uplift(fb, fp);
    Note(Format("seed %zu: hardest %zu scenarios uplift %+.2f%%, full set %+.2f%%", i + 1,
                hardest.size(), 100 * hard, 100 * full));
    hard_mean += hard / runs.seeds.size();
    full_mean += full / runs.seeds.size();
  }
  return {hard_mean > full_mean,
          Format("mean over %d paired seeds: hardest-10%% uplift %.2f%% vs full-set %.2f%%", kSeeds,
                 100 * hard_mean, 100 * full_mean)};
}

Outcome LatencyTrend() {
  // A 3 s history so that features 1 s and 2 s old still fall inside it.
  const TimingProfile timing{10.0, 30, 80};
  const uint64_t seed = 1;
  const Split split = MakeSplit(seed, timing);
  const Features f = Extract(split, FaultProfile{}, {0.0, 1.0, 2.0});
  const Evaluation base = EvaluateModel(TrainModel(split, nullptr, timing, seed), split, nullptr);
  const Predictor pnf = TrainModel(split, &f.train, timing, seed);
  std::vector<double> uplift;
  for (double delay : {0.0, 1.0, 2.0}) {
    const Evaluation e = EvaluateModel(pnf, split, &f.eval, delay);
    uplift.push_back(Uplift(base.report.min_ade.value, e.report.min_ade.value));
  }
  const bool monotone = uplift[0] >= uplift[1] && uplift[1] >= uplift[2];
  return {monotone && uplift[2] >= 0.0,
          Format("uplift at delay 0/1/2 s: %+.2f%% / %+.2f%% / %+.2f%% (non-increasing, last >= 0)",
                 100 * uplift[0], 100 * uplift[1], 100 * uplift[2])};
}

Outcome NoiseRobustness() {
  const PairedRuns& runs = Runs(true);
  double worst = -1.0, alpha_clean = 0.0, alpha_noisy = 0.0;
  for (const SeedRun& r : runs.seeds) {
    worst = std::max(worst, r.noisy.report.min_ade.value / r.baseline.report.min_ade.value - 1.0);
    alpha_clean += r.pnf.mean_abs_alpha / runs.seeds.size();
    alpha_noisy += r.noisy.mean_abs_alpha / runs.seeds.size();
  }
  return {worst <= 0.02 && alpha_noisy < alpha_clean,
          Format("worst minADE vs baseline %+.2f%% (<= +2%%); mean |alpha| %.4f noisy vs %.4f "
                 "zero-fault",
                 100 * worst, alpha_noisy, alpha_clean)};
}

// ---------------------------------------------------------------------------
// 10. Parameter overhead.

Outcome ParameterOverhead() {
  const Predictor model(PredictorConfig{}, 1);
  int64_t total = 0, semantic = 0;
  for (const ShapeEntry& e : model.ShapeManifest()) {
    const int64_t n = static_cast<int64_t>(e.rows) * e.cols;
    total += n;
    if (e.semantic) semantic += n;
  }
  const double ratio = static_cast<double>(semantic) / (total - semantic);
  return {ratio < 0.01, Format("%lld semantic of %lld parameters: +%.3f%% over the baseline "
                               "(< 1%%)",
                               static_cast<long long>(semantic), static_cast<long long>(total),
                               100 * ratio)};
}

}  // namespace
}  // namespace semcast

int main(int argc, char** argv) {
  using semcast::Outcome;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "parser corpus exactness", semcast::CorpusExactness},
      {2, "parser totality fuzz", semcast::ParserTotality},
      {3, "gate identity", semcast::GateIdentity},
      {4, "gradient correctness", semcast::GradientCheck},
      {5, "metric oracles", semcast::MetricOracles},
      {6, "synthetic uplift", semcast::SyntheticUplift},
      {7, "hardest-split amplification", semcast::HardestSplitAmplification},
      {8, "latency trend", semcast::LatencyTrend},
      {9, "noise robustness", semcast::NoiseRobustness},
      {10, "parameter overhead", semcast::ParameterOverhead},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %d. %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
