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

#include "semcast/trainer.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include "semcast/common.h"

namespace semcast {

void TrainConfig::Validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

Adam::Adam(ParamSet& params, const TrainConfig& config)
    : params_(params), beta1_(config.beta1), beta2_(config.beta2), eps_(config.adam_eps) {
  for (const Parameter* p : params_.all()) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::Step(double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  std::vector<Parameter*> ps = params_.all();
  for (size_t i = 0; i < ps.size(); ++i) {
    Parameter& p = *ps[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -=
        learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

TrainResult Train(Predictor& model, const std::vector<PreparedSample>& samples,
                  const TrainConfig& config, uint64_t seed,
                  const std::function<void(const TrainLogRow&)>& on_step) {
  config.Validate();
  std::vector<size_t> usable;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].has_future()) usable.push_back(i);
  }
  if (usable.empty()) throw TrainingError("training set has no sample with a valid future");

  const int per_epoch =
      static_cast<int>((usable.size() + config.batch_size - 1) / config.batch_size);
  const int total_steps = per_epoch * config.epochs;
  Adam adam(model.params(), config);
  Rng rng(seed);
  TrainResult result;

  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<size_t> order = usable;
    rng.Shuffle(order);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      model.params().ZeroGrad();
      double loss_sum = 0.0, alpha_sum = 0.0;
      int alpha_count = 0;
      // Fixed in-batch order keeps the gradient reduction deterministic.
      for (size_t b = start; b < end; ++b) {
        const PreparedSample& s = samples[order[b]];
        Graph g;
        const Predictor::Outputs out = model.Build(g, s);
        const Var loss = model.Loss(g, out, s);
        const double value = g.value(loss)(0, 0);
        if (!std::isfinite(value) || value > config.divergence_loss) {
          throw TrainingError("loss diverged (" + std::to_string(value) + ") at step " +
                              std::to_string(step) + " on scenario '" + s.scenario_id +
                              "' agent '" + s.target_id + "'");
        }
        loss_sum += value;
        g.Backward(Scale(g, loss, inv));
        if (out.agent_alpha.valid()) {
          alpha_sum += g.value(out.agent_alpha).cwiseAbs().sum() +
                       std::abs(g.value(out.scene_alpha)(0, 0));
          alpha_count += static_cast<int>(g.value(out.agent_alpha).size()) + 1;
        }
      }
      double sq = 0.0;
      for (const Parameter* p : model.params().all()) sq += p->grad.squaredNorm();
      const double norm = std::sqrt(sq);
      if (!std::isfinite(norm)) {
        throw TrainingError("non-finite gradient at step " + std::to_string(step));
      }
      if (config.grad_clip_norm > 0.0 && norm > config.grad_clip_norm) {
        const double c = config.grad_clip_norm / norm;
        for (Parameter* p : model.params().all()) p->grad *= c;
      }
      const double lr = config.learning_rate * 0.5 *
                        (1.0 + std::cos(std::numbers::pi * step / total_steps));
      adam.Step(lr);

      TrainLogRow row{step, loss_sum * inv, norm,
                      alpha_count > 0 ? alpha_sum / alpha_count : 0.0, lr};
      result.log.push_back(row);
      if (on_step) on_step(row);
      ++step;
      if (config.checkpoint_every > 0 && !config.checkpoint_dir.empty() &&
          step % config.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "ckpt_step_%06d.json", step);
        model.SaveCheckpoint(config.checkpoint_dir / name, config.config_hash);
      }
    }
  }
  result.steps = step;
  return result;
}

double MeanLoss(const Predictor& model, const std::vector<PreparedSample>& samples) {
  double sum = 0.0;
  int n = 0;
  for (const PreparedSample& s : samples) {
    if (!s.has_future()) continue;
    Graph g(/*record=*/false);
    const Predictor::Outputs out = model.Build(g, s);
    sum += GmmLossValue(g.value(out.logits), g.value(out.gaussian), s.gt, s.gt_mask).total();
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

void SaveTrainLogCsv(const std::vector<TrainLogRow>& log, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "step,loss,grad_norm,mean_abs_alpha,learning_rate\n";
  char buf[160];
  for (const TrainLogRow& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g\n", r.step, r.loss, r.grad_norm,
                  r.mean_abs_alpha, r.learning_rate);
    os << buf;
  }
}

}  // namespace semcast
