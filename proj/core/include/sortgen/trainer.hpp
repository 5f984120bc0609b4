// Copyright 2026 The SortGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SORTGEN_TRAINER_HPP_
#define SORTGEN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/model.hpp"
#include "sortgen/simulator.hpp"

namespace sortgen {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  LossMode loss_mode = LossMode::kOrderedRegression;
  double eval_fraction = 0.1;
  std::string checkpoint_path;  // empty: no checkpoint
  std::string metrics_path;     // empty: no metrics file
  std::size_t patience = 0;     // epochs without improvement; 0 disables
  std::uint64_t seed = 7;
};

TrainConfig train_config_from(const ConfigFile& file, const EngineConfig& engine);
void validate_train_config(const TrainConfig& config);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  double calib_gap = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  LossMode loss_mode = LossMode::kOrderedRegression;
  double initial_eval_loss = 0.0;
  double initial_calib_gap = 0.0;
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 means the initial model
  double best_eval_loss = 0.0;
  bool stopped_early = false;
  double wall_seconds = 0.0;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// Assigns whole sessions by a hash of the session id, so the split does not
/// depend on record order.
DataSplit split_by_session(const Dataset& data, double eval_fraction);

struct EvalMetrics {
  std::size_t samples = 0;
  double loss = 0.0;
  // Per prefix length j = 1..l: mean predicted expected count and mean
  // empirical cumulative count.
  std::vector<double> predicted_click, empirical_click;
  std::vector<double> predicted_pay, empirical_pay;
  std::vector<double> gap;  // |pred - emp| averaged over the two objectives
  double calib_gap = 0.0;   // mean of gap over j
};

/// Calibration of precomputed survival matrices against labels; `scores[k]`
/// scores the list labeled by `labels[k]`. The loss field is left at zero.
EvalMetrics calibration_metrics(std::span<const ListScores> scores,
                                std::span<const LabelVector> labels);

EvalMetrics evaluate_model(const SortModel& model, const Dataset& data,
                           std::span<const std::size_t> indices, LossMode mode);

/// Mean batch loss of `model` over the given samples in the given mode.
double dataset_loss(const SortModel& model, const Dataset& data,
                    std::span<const std::size_t> indices, LossMode mode,
                    std::size_t batch_size = 256);

/// Mini-batch Adam on the configured loss. The model keeps the parameters
/// of the best evaluation epoch, which is also what gets checkpointed.
TrainReport train(const Dataset& data, SortModel& model, const TrainConfig& config);

std::string metrics_header();
std::string metrics_line(const EpochMetrics& m);

}  // namespace sortgen

#endif  // SORTGEN_TRAINER_HPP_
