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

#include <cmath>
#include <limits>
#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sortgen/checkpoint.hpp"
#include "sortgen/io.hpp"
#include "sortgen/trainer.hpp"
#include "support.hpp"

namespace sortgen {
namespace {

struct Fixture {
  EngineConfig engine = testing::small_config(12, 5);
  Dataset data;

  explicit Fixture(std::size_t sessions = 400) {
    SimulatorConfig sim;
    sim.n_items = 40;
    sim.sessions = sessions;
    data = simulate_dataset(engine, sim);
  }
};

TrainConfig quick(std::size_t epochs = 2) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 32;
  t.learning_rate = 1e-2;
  return t;
}

TEST(Split, BySessionHash) {
  const Fixture f;
  const DataSplit s = split_by_session(f.data, 0.25);
  EXPECT_EQ(s.train.size() + s.eval.size(), f.data.samples.size());
  EXPECT_GT(s.eval.size(), 50u);
  EXPECT_LT(s.eval.size(), 150u);
  // Reordering the records moves no session across the split.
  Dataset reversed = f.data;
  std::reverse(reversed.samples.begin(), reversed.samples.end());
  const DataSplit r = split_by_session(reversed, 0.25);
  std::set<std::uint64_t> a, b;
  for (std::size_t k : s.eval) a.insert(f.data.samples[k].session_id);
  for (std::size_t k : r.eval) b.insert(reversed.samples[k].session_id);
  EXPECT_EQ(a, b);
}

TEST(TrainConfig, Validation) {
  TrainConfig t;
  EXPECT_NO_THROW(validate_train_config(t));
  t.eval_fraction = 1.0;
  EXPECT_THROW(validate_train_config(t), ConfigError);
  t = TrainConfig{};
  t.batch_size = 0;
  EXPECT_THROW(validate_train_config(t), ConfigError);
  const TrainConfig parsed = train_config_from(
      ConfigFile::parse("train.epochs = 3\ntrain.batch_size = 16\nloss_mode = pointwise\n"),
      engine_config_from(ConfigFile::parse("loss_mode = pointwise\n")));
  EXPECT_EQ(parsed.epochs, 3u);
  EXPECT_EQ(parsed.batch_size, 16u);
  EXPECT_EQ(parsed.loss_mode, LossMode::kPointwise);
}

TEST(Train, ZeroLearningRateChangesNothing) {
  const Fixture f;
  SortModel model = SortModel::initialize(f.engine, 1);
  const nn::ParamStore before = model.params();
  TrainConfig t = quick(3);
  t.learning_rate = 0.0;
  const TrainReport r = train(f.data, model, t);
  EXPECT_TRUE(model.params() == before);
  ASSERT_EQ(r.epochs.size(), 3u);
  for (const auto& e : r.epochs) {
    EXPECT_NEAR(e.train_loss, r.epochs[0].train_loss, 1e-12);
    EXPECT_EQ(e.eval_loss, r.initial_eval_loss);
  }
}

TEST(Train, SameSeedSameReport) {
  const Fixture f;
  for (LossMode mode : {LossMode::kOrderedRegression, LossMode::kPointwise}) {
    TrainConfig t = quick();
    t.loss_mode = mode;
    SortModel a = SortModel::initialize(f.engine, 2);
    SortModel b = SortModel::initialize(f.engine, 2);
    const TrainReport ra = train(f.data, a, t);
    const TrainReport rb = train(f.data, b, t);
    ASSERT_EQ(ra.epochs.size(), rb.epochs.size());
    for (std::size_t e = 0; e < ra.epochs.size(); ++e) {
      EXPECT_EQ(ra.epochs[e].train_loss, rb.epochs[e].train_loss);
      EXPECT_EQ(ra.epochs[e].eval_loss, rb.epochs[e].eval_loss);
      EXPECT_EQ(ra.epochs[e].calib_gap, rb.epochs[e].calib_gap);
    }
    EXPECT_EQ(ra.initial_eval_loss, rb.initial_eval_loss);
    EXPECT_EQ(ra.best_epoch, rb.best_epoch);
    EXPECT_EQ(ra.loss_mode, mode);
    EXPECT_TRUE(a.params() == b.params());
  }
}

TEST(Train, LearnsAndCheckpointsBestEpoch) {
  const Fixture f(1500);
  const testing::ScratchDir dir("train");
  SortModel model = SortModel::initialize(f.engine, 3);
  TrainConfig t = quick(4);
  t.checkpoint_path = dir.file("m.ckpt");
  t.metrics_path = dir.file("metrics.tsv");
  const TrainReport r = train(f.data, model, t);
  EXPECT_LT(r.best_eval_loss, r.initial_eval_loss);
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_EQ(r.best_eval_loss, r.epochs[r.best_epoch - 1].eval_loss);
  // The model holds the best parameters, and so does the checkpoint.
  const SortModel back = load_checkpoint(t.checkpoint_path, f.engine);
  EXPECT_TRUE(back.params() == model.params());
  const DataSplit split = split_by_session(f.data, t.eval_fraction);
  EXPECT_EQ(evaluate_model(model, f.data, split.eval, t.loss_mode).loss, r.best_eval_loss);
  // One header line plus one line per epoch, five tab-separated fields.
  const std::string metrics = read_file(t.metrics_path);
  EXPECT_EQ(metrics.rfind(metrics_header() + "\n", 0), 0u);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 5);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\t'), 4 * 5);
}

TEST(Train, PatienceStopsEarly) {
  const Fixture f;
  SortModel model = SortModel::initialize(f.engine, 4);
  TrainConfig t = quick(6);
  t.learning_rate = 0.0;
  t.patience = 2;
  const TrainReport r = train(f.data, model, t);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(r.best_epoch, 0u);
}

TEST(Train, NonFiniteStateAbortsWithDiagnostics) {
  const Fixture f;
  SortModel model = SortModel::initialize(f.engine, 5);
  model.params().value("input.w")[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(f.data, model, quick());
    FAIL() << "expected Error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("parameter norm"), std::string::npos) << msg;
  }
  EXPECT_THROW(train(Dataset{}, model, quick()), Error);
}

TEST(Train, GradientReachesEveryTensor) {
  const EngineConfig c;  // default shape
  SimulatorConfig sim;
  sim.sessions = 64;
  const Dataset data = simulate_dataset(c, sim);
  std::vector<std::vector<const Item*>> seqs;
  std::vector<const UserContext*> users;
  std::vector<LabelVector> labels;
  for (const auto& s : data.samples) {
    std::vector<const Item*> seq;
    for (const Item& it : s.items) seq.push_back(&it);
    seqs.push_back(seq);
    users.push_back(&s.user);
    labels.push_back(s.labels);
  }
  for (LossMode mode : {LossMode::kOrderedRegression, LossMode::kPointwise}) {
    SortModel model = SortModel::initialize(c, 6);
    nn::Tape tape(model.params());
    const ForwardVars out = model.forward(tape, assemble_input(seqs, users, c));
    const nn::Var loss = training_loss(tape, out, labels, mode, c.max_count);
    ASSERT_GT(tape.value(loss)[0], 0.0);
    model.params().zero_grad();
    tape.backward(loss, model.params());
    std::size_t nonzero = 0;
    for (const auto& [name, p] : model.params()) nonzero += p.grad.squared_norm() > 0.0;
    EXPECT_GE(static_cast<double>(nonzero),
              0.99 * static_cast<double>(model.params().num_tensors()))
        << to_string(mode);
  }
}

TEST(Train, LossModeOnlyChangesTheLoss) {
  EngineConfig a = testing::small_config();
  EngineConfig b = a;
  b.loss_mode = LossMode::kPointwise;
  const SortModel ma(a, SortModel::init_params(a, 7));
  const SortModel mb(b, SortModel::init_params(b, 7));
  EXPECT_TRUE(ma.params() == mb.params());
  std::mt19937_64 rng(7);
  const auto pool = testing::random_pool(rng, a.l_s, a.d_emb);
  const UserContext user = testing::random_user(rng, a.d_user);
  SubList list;
  for (std::size_t k = 0; k < a.l_o; ++k) {
    list.items.push_back(k);
    list.source_queues.push_back(0);
  }
  const ListScores sa = ma.predict_one(pool, list, user);
  const ListScores sb = mb.predict_one(pool, list, user);
  EXPECT_EQ(sa.click, sb.click);
  EXPECT_EQ(sa.pay, sb.pay);
}

TEST(Calibration, PerfectSurvivalHasZeroGap) {
  std::mt19937_64 rng(8);
  std::vector<ListScores> scores;
  std::vector<LabelVector> labels;
  for (int k = 0; k < 200; ++k) {
    const LabelVector y = testing::random_labels(rng, 6);
    ListScores s;
    s.click = SurvivalMatrix(6, 6, Objective::kClick);
    s.pay = SurvivalMatrix(6, 6, Objective::kPay);
    const auto yc = y.cumulative_clicks();
    const auto yp = y.cumulative_pays();
    for (std::size_t j = 1; j <= 6; ++j) {
      for (std::size_t i = 1; i <= j; ++i) {
        s.click.at(i, j) = yc[j - 1] >= static_cast<int>(i) ? 1.0 : 0.0;
        s.pay.at(i, j) = yp[j - 1] >= static_cast<int>(i) ? 1.0 : 0.0;
      }
    }
    scores.push_back(s);
    labels.push_back(y);
  }
  const EvalMetrics m = calibration_metrics(scores, labels);
  EXPECT_EQ(m.calib_gap, 0.0);
  for (double g : m.gap) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(calibration_metrics({}, {}), Error);
}

TEST(Calibration, UntrainedModelOverestimatesLowCtrData) {
  const Fixture f;
  const SortModel model = SortModel::initialize(f.engine, 9);
  std::vector<std::size_t> all(f.data.samples.size());
  std::iota(all.begin(), all.end(), 0);
  const EvalMetrics m = evaluate_model(model, f.data, all, LossMode::kOrderedRegression);
  ASSERT_EQ(m.gap.size(), f.engine.l_o);
  // Recorded rather than bounded: the sign is what matters.
  EXPECT_GT(m.predicted_click.back(), m.empirical_click.back());
  EXPECT_GT(m.calib_gap, 0.0);
  EXPECT_THROW(evaluate_model(model, f.data, {}, LossMode::kOrderedRegression), Error);
}

}  // namespace
}  // namespace sortgen
