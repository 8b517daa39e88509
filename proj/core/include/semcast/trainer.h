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

// Mini-batch training loop with Adam, cosine learning-rate decay and global
// gradient-norm clipping.

#ifndef SEMCAST_TRAINER_H_
#define SEMCAST_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "semcast/predictor.h"

namespace semcast {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 5.0;  // <= 0 disables clipping
  double divergence_loss = 1e6;
  int checkpoint_every = 0;  // steps; 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;
  std::string config_hash;  // embedded in checkpoints

  void Validate() const;
};

struct TrainLogRow {
  int step = 0;
  double loss = 0.0;  // batch mean
  double grad_norm = 0.0;  // before clipping
  double mean_abs_alpha = 0.0;  // over agent and scene gates in the batch
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  int steps = 0;
};

class Adam {
 public:
  Adam(ParamSet& params, const TrainConfig& config);
  void Step(double learning_rate);

 private:
  ParamSet& params_;
  double beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Mat> m_, v_;
};

// Samples without any valid future step are skipped. Throws TrainingError
// when a loss is non-finite or exceeds the divergence threshold.
TrainResult Train(Predictor& model, const std::vector<PreparedSample>& samples,
                  const TrainConfig& config, uint64_t seed,
                  const std::function<void(const TrainLogRow&)>& on_step = {});

// Mean GMM loss over samples with a valid future.
double MeanLoss(const Predictor& model, const std::vector<PreparedSample>& samples);

void SaveTrainLogCsv(const std::vector<TrainLogRow>& log, const std::filesystem::path& path);

}  // namespace semcast

#endif  // SEMCAST_TRAINER_H_
