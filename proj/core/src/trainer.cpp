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

#include "sortgen/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "sortgen/checkpoint.hpp"
#include "sortgen/io.hpp"
#include "sortgen/tape.hpp"

namespace sortgen {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ModelInput batch_input(const Dataset& data, std::span<const std::size_t> idx,
                       const EngineConfig& config) {
  std::vector<std::vector<const Item*>> seqs;
  std::vector<const UserContext*> users;
  seqs.reserve(idx.size());
  for (std::size_t k : idx) {
    const ImpressionSample& s = data.samples[k];
    std::vector<const Item*> seq;
    for (const Item& it : s.items) seq.push_back(&it);
    seqs.push_back(std::move(seq));
    users.push_back(&s.user);
  }
  return assemble_input(seqs, users, config);
}

std::vector<double> first_column(std::span<const double> logits, std::size_t length,
                                 std::size_t max_count) {
  std::vector<double> out(length);
  for (std::size_t t = 0; t < length; ++t) out[t] = logits[t * max_count];
  return out;
}

double sample_loss(const ListScores& s, const LabelVector& labels, LossMode mode,
                   std::size_t max_count) {
  if (mode == LossMode::kOrderedRegression) {
    return ordered_regression_loss(s.click, s.pay, labels);
  }
  return pointwise_loss(first_column(s.click_logits, labels.size(), max_count),
                        first_column(s.pay_logits, labels.size(), max_count), labels);
}

// Samples must share a length to be batched together.
std::vector<std::vector<std::size_t>> group_by_length(const Dataset& data,
                                                      std::span<const std::size_t> idx,
                                                      std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::vector<std::size_t>> open;
  std::vector<std::size_t> lengths;
  for (std::size_t k : idx) {
    const std::size_t len = data.samples[k].items.size();
    std::size_t slot = 0;
    while (slot < lengths.size() && lengths[slot] != len) ++slot;
    if (slot == lengths.size()) {
      lengths.push_back(len);
      open.emplace_back();
    }
    open[slot].push_back(k);
    if (open[slot].size() == batch_size) {
      batches.push_back(std::move(open[slot]));
      open[slot].clear();
    }
  }
  for (auto& b : open) {
    if (!b.empty()) batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace

TrainConfig train_config_from(const ConfigFile& file, const EngineConfig& engine) {
  TrainConfig t;
  t.batch_size = file.get_size("train.batch_size", t.batch_size);
  t.epochs = file.get_size("train.epochs", t.epochs);
  t.learning_rate = file.get_double("train.learning_rate", t.learning_rate);
  t.loss_mode = engine.loss_mode;
  t.eval_fraction = file.get_double("train.eval_fraction", t.eval_fraction);
  t.patience = file.get_size("train.patience", t.patience);
  t.metrics_path = file.get_string("train.metrics", t.metrics_path);
  t.seed = file.get_u64("train.seed", engine.seed);
  return t;
}

void validate_train_config(const TrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be at least 1");
  if (!(c.eval_fraction > 0.0 && c.eval_fraction < 1.0)) {
    throw ConfigError("train.eval_fraction must be in (0, 1)");
  }
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("train.learning_rate must be finite and non-negative");
  }
}

DataSplit split_by_session(const Dataset& data, double eval_fraction) {
  DataSplit split;
  constexpr std::uint64_t kBuckets = 1'000'000;
  const auto cut = static_cast<std::uint64_t>(eval_fraction * kBuckets);
  for (std::size_t k = 0; k < data.samples.size(); ++k) {
    const std::uint64_t bucket = mix_seed(data.samples[k].session_id, 0x5E1) % kBuckets;
    (bucket < cut ? split.eval : split.train).push_back(k);
  }
  return split;
}

namespace {

// Running per-prefix sums of predicted and empirical cumulative counts.
class CalibrationSums {
 public:
  void add(const ListScores& scores, const LabelVector& labels) {
    const std::size_t len = labels.size();
    if (scores.click.length() < len || scores.pay.length() < len) {
      throw ShapeError("calibration: scores cover fewer positions than the labels");
    }
    if (len > counts_.size()) {
      for (auto* v : {&pc_, &ec_, &pp_, &ep_}) v->resize(len, 0.0);
      counts_.resize(len, 0);
    }
    const auto yc = labels.cumulative_clicks();
    const auto yp = labels.cumulative_pays();
    for (std::size_t j = 1; j <= len; ++j) {
      pc_[j - 1] += expected_count(scores.click, j);
      pp_[j - 1] += expected_count(scores.pay, j);
      ec_[j - 1] += yc[j - 1];
      ep_[j - 1] += yp[j - 1];
      ++counts_[j - 1];
    }
  }

  void finish(EvalMetrics& m) const {
    double total_gap = 0.0;
    for (std::size_t j = 0; j < counts_.size(); ++j) {
      const double n = static_cast<double>(std::max<std::size_t>(counts_[j], 1));
      m.predicted_click.push_back(pc_[j] / n);
      m.empirical_click.push_back(ec_[j] / n);
      m.predicted_pay.push_back(pp_[j] / n);
      m.empirical_pay.push_back(ep_[j] / n);
      const double g = 0.5 * (std::abs(pc_[j] - ec_[j]) + std::abs(pp_[j] - ep_[j])) / n;
      m.gap.push_back(g);
      total_gap += g;
    }
    m.calib_gap = counts_.empty() ? 0.0 : total_gap / static_cast<double>(counts_.size());
  }

 private:
  std::vector<double> pc_, ec_, pp_, ep_;
  std::vector<std::size_t> counts_;
};

}  // namespace

EvalMetrics calibration_metrics(std::span<const ListScores> scores,
                                std::span<const LabelVector> labels) {
  if (scores.empty()) throw ConfigError("calibration_metrics: no samples");
  if (scores.size() != labels.size()) {
    throw ShapeError("calibration_metrics: one score set per label vector");
  }
  CalibrationSums sums;
  for (std::size_t k = 0; k < scores.size(); ++k) sums.add(scores[k], labels[k]);
  EvalMetrics m;
  m.samples = scores.size();
  sums.finish(m);
  return m;
}

EvalMetrics evaluate_model(const SortModel& model, const Dataset& data,
                           std::span<const std::size_t> indices, LossMode mode) {
  if (indices.empty()) throw ConfigError("evaluate_model: empty split");
  const EngineConfig& config = model.config();
  EvalMetrics m;
  CalibrationSums sums;
  for (const auto& batch : group_by_length(data, indices, 256)) {
    const auto scores = model.predict(batch_input(data, batch, config));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const ImpressionSample& s = data.samples[batch[b]];
      m.loss += sample_loss(scores[b], s.labels, mode, config.max_count);
      sums.add(scores[b], s.labels);
    }
  }
  m.samples = indices.size();
  m.loss /= static_cast<double>(indices.size());
  sums.finish(m);
  return m;
}

double dataset_loss(const SortModel& model, const Dataset& data,
                    std::span<const std::size_t> indices, LossMode mode,
                    std::size_t batch_size) {
  if (indices.empty()) throw ConfigError("dataset_loss: empty split");
  double loss = 0.0;
  for (const auto& batch : group_by_length(data, indices, batch_size)) {
    const auto scores = model.predict(batch_input(data, batch, model.config()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      loss += sample_loss(scores[b], data.samples[batch[b]].labels, mode,
                          model.config().max_count);
    }
  }
  return loss / static_cast<double>(indices.size());
}

TrainReport train(const Dataset& data, SortModel& model, const TrainConfig& config) {
  validate_train_config(config);
  if (data.samples.empty()) throw ConfigError("train: dataset is empty");
  const auto start = Clock::now();
  const EngineConfig& engine = model.config();

  DataSplit split = split_by_session(data, config.eval_fraction);
  if (split.train.empty() || split.eval.empty()) {
    throw ConfigError("train: eval split leaves no training or no evaluation sessions");
  }

  TrainReport report;
  report.loss_mode = config.loss_mode;
  try {
    const EvalMetrics m0 = evaluate_model(model, data, split.eval, config.loss_mode);
    if (!std::isfinite(m0.loss)) throw Error("initial eval loss is not finite");
    report.initial_eval_loss = m0.loss;
    report.initial_calib_gap = m0.calib_gap;
  } catch (const Error& e) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), " (before epoch 1, batch 0, parameter norm %.6g)",
                  model.params().value_norm());
    throw Error(std::string("training aborted: ") + e.what() + buf);
  }
  report.best_eval_loss = report.initial_eval_loss;
  nn::ParamStore best = model.params();

  std::string metrics = metrics_header() + "\n";
  if (!config.metrics_path.empty()) write_file(config.metrics_path, metrics);

  nn::AdamState adam;
  adam.learning_rate = config.learning_rate;
  adam.init(model.params());
  model.params().zero_grad();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order = split.train;
  std::size_t since_best = 0;
  std::size_t batch_counter = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double train_loss = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : group_by_length(data, order, config.batch_size)) {
      std::vector<LabelVector> labels;
      labels.reserve(batch.size());
      for (std::size_t k : batch) labels.push_back(data.samples[k].labels);
      double loss = 0.0;
      try {
        nn::Tape tape(model.params());
        const ForwardVars out = model.forward(tape, batch_input(data, batch, engine));
        const nn::Var l =
            training_loss(tape, out, labels, config.loss_mode, engine.max_count);
        loss = tape.value(l)[0];
        if (!std::isfinite(loss)) throw Error("loss is not finite");
        tape.backward(l, model.params());
        nn::adam_step(model.params(), adam);
      } catch (const Error& e) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), " (epoch %zu, batch %zu, parameter norm %.6g)",
                      epoch, batch_counter, model.params().value_norm());
        throw Error(std::string("training aborted: ") + e.what() + buf);
      }
      train_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();
      ++batch_counter;
    }

    const EvalMetrics m = evaluate_model(model, data, split.eval, config.loss_mode);
    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = train_loss / static_cast<double>(std::max<std::size_t>(seen, 1));
    em.eval_loss = m.loss;
    em.calib_gap = m.calib_gap;
    em.seconds = seconds_since(epoch_start);
    report.epochs.push_back(em);
    metrics += metrics_line(em) + "\n";
    if (!config.metrics_path.empty()) write_file(config.metrics_path, metrics);

    if (m.loss < report.best_eval_loss) {
      report.best_eval_loss = m.loss;
      report.best_epoch = epoch;
      best = model.params();
      since_best = 0;
      if (!config.checkpoint_path.empty()) save_checkpoint(config.checkpoint_path, model);
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }

  model.params() = best;
  model.params().zero_grad();
  if (!config.checkpoint_path.empty() && report.best_epoch == 0) {
    save_checkpoint(config.checkpoint_path, model);
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

std::string metrics_header() { return "epoch\ttrain_loss\teval_loss\tcalib_gap\tseconds"; }

std::string metrics_line(const EpochMetrics& m) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g\t%.10g\t%.3f", m.epoch, m.train_loss,
                m.eval_loss, m.calib_gap, m.seconds);
  return buf;
}

}  // namespace sortgen
