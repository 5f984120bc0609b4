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

#include <random>

#include <gtest/gtest.h>

#include "sortgen/config.hpp"
#include "sortgen/generation.hpp"
#include "sortgen/model.hpp"
#include "sortgen/queues.hpp"
#include "sortgen/tape.hpp"
#include "support.hpp"

namespace sortgen {
namespace {

TEST(ValidateConfig, DefaultShapeIsValid) {
  EngineConfig c;
  c.l_s = 30;
  c.l_o = 10;
  c.max_count = 10;
  ASSERT_EQ(c.num_queues(), 3u);
  EXPECT_EQ(validate_config(c), std::nullopt);
}

TEST(ValidateConfig, OutputLongerThanPool) {
  EngineConfig c;
  c.l_s = 5;
  c.l_o = 10;
  EXPECT_EQ(validate_config(c), "l_o exceeds l_s");
  EXPECT_THROW(require_valid(c), ConfigError);
}

TEST(ValidateConfig, HeadsMustDivideModelWidth) {
  EngineConfig c;
  c.d_model = 10;
  c.n_heads = 3;
  EXPECT_EQ(validate_config(c), "d_model not divisible by n_heads");
}

TEST(ValidateConfig, OtherInvariants) {
  EngineConfig c;
  c.max_count = 11;
  EXPECT_EQ(validate_config(c), "max_count exceeds l_o");
  c = EngineConfig{};
  c.queue_specs.clear();
  EXPECT_EQ(validate_config(c), "queue_specs is empty");
  c = EngineConfig{};
  c.window_w = 0;
  EXPECT_EQ(validate_config(c), "window_w must be at least 1");
  c = EngineConfig{};
  c.d_score = 3;
  ASSERT_TRUE(validate_config(c).has_value());
  EXPECT_NE(validate_config(c)->find("dimension mismatch"), std::string::npos);
  c = EngineConfig{};
  c.lambda_mmr = 1.5;
  EXPECT_TRUE(validate_config(c).has_value());
  c = EngineConfig{};
  c.weights = {0.0, 0.0, 0.0};
  EXPECT_TRUE(validate_config(c).has_value());
}

TEST(QueueSpecText, ParsesAndFormats) {
  const QueueSpec q = parse_queue_spec("mix: 0.5*ctr + 0.5*ctr_cvr", 0);
  EXPECT_EQ(q.name, "mix");
  EXPECT_EQ(q.coefficient(ScoreTerm::kCtr), 0.5);
  EXPECT_EQ(q.coefficient(ScoreTerm::kCtrCvr), 0.5);
  EXPECT_EQ(q.coefficient(ScoreTerm::kPrice), 0.0);
  EXPECT_EQ(parse_queue_spec(format_queue_spec(q), 0), q);
  EXPECT_THROW(parse_queue_spec("bad: 2*nothing", 0), ConfigError);
}

TEST(ConfigFile, ParsesKeysAndReportsUnused) {
  const ConfigFile f = ConfigFile::parse(
      "# comment\nl_s = 12\nl_o = 4\nqueue = a: ctr\nqueue = b: price\ntypo = 1\n");
  const EngineConfig c = engine_config_from(f);
  EXPECT_EQ(c.l_s, 12u);
  EXPECT_EQ(c.l_o, 4u);
  EXPECT_EQ(c.max_count, 4u);  // follows l_o
  ASSERT_EQ(c.num_queues(), 2u);
  EXPECT_EQ(c.queue_specs[1].priority, 1);
  EXPECT_EQ(f.unused_keys(), std::vector<std::string>{"typo"});
}

TEST(ConfigFile, MalformedLineNamesOrigin) {
  try {
    ConfigFile::parse("l_s = 3\nnot a pair\n", "demo.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("demo.cfg:2"), std::string::npos);
  }
}

EngineConfig random_config(std::mt19937_64& rng) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  EngineConfig c;
  c.l_o = pick(1, 6);
  c.l_s = c.l_o + pick(0, 6);
  c.max_count = pick(1, c.l_o);
  c.d_emb = pick(1, 5);
  c.d_user = pick(1, 4);
  c.d_position = pick(1, 3);
  c.n_heads = pick(1, 3);
  c.d_model = c.n_heads * pick(1, 4);
  if (c.d_model < 2) c.d_model = 2 * c.n_heads;
  c.n_layers = pick(1, 2);
  c.head_hidden = pick(1, 5);
  c.window_w = pick(1, 4);
  c.lambda_mmr = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  c.head_mode = pick(0, 1) ? HeadMode::kMonotone : HeadMode::kLiteral;
  c.partition_strategy = pick(0, 1) ? PartitionStrategy::kDfs : PartitionStrategy::kBfs;
  c.loss_mode = pick(0, 1) ? LossMode::kOrderedRegression : LossMode::kPointwise;
  c.queue_specs.resize(pick(1, 3));
  c.template_pattern = {0, static_cast<int>(pick(0, 4))};
  return c;
}

// Any accepted configuration must flow through the model, the losses and
// generation without shape errors, and survive a text round trip.
TEST(ValidateConfig, AcceptedConfigsWorkEverywhere) {
  std::mt19937_64 rng(2024);
  std::size_t accepted = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const EngineConfig c = random_config(rng);
    if (validate_config(c)) continue;
    ++accepted;
    SCOPED_TRACE(engine_config_to_text(c));
    EXPECT_EQ(engine_config_from(ConfigFile::parse(engine_config_to_text(c))), c);

    const SortModel model = SortModel::initialize(c, trial);
    const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
    const UserContext user = testing::random_user(rng, c.d_user);
    CandidateQueues queues = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
    const GenerationParams params = GenerationParams::from(c);
    // Small queue totals can run dry; that is an infeasible request, not a
    // shape error.
    std::size_t supply = 0;
    for (const auto& q : queues.queues()) supply += q.size();
    if (supply >= c.l_o) {
      const GenerationTrace t = generate(pool, user, queues, model, params);
      EXPECT_EQ(t.result.size(), c.l_o);
    } else {
      EXPECT_THROW(generate(pool, user, queues, model, params), Error);
    }
    const SubList list = prior_score_order(pool, c.l_o);
    nn::Tape tape(model.params());
    const ModelInput in = assemble_input(pool, list, user, c);
    const ForwardVars out = model.forward(tape, in);
    const LabelVector labels = testing::random_labels(rng, c.l_o);
    const nn::Var loss = training_loss(tape, out, std::span(&labels, 1), c.loss_mode, c.max_count);
    nn::ParamStore grads = model.params();
    grads.zero_grad();
    tape.backward(loss, grads);
    const ListScores scores = model.predict_one(pool, list, user);
    EXPECT_EQ(scores.click.length(), c.l_o);
  }
  EXPECT_GE(accepted, 20u);
}

}  // namespace
}  // namespace sortgen
